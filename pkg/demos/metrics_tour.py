"""
Reading a classification report
===============================

A small hand-checkable prediction vector: 8 positives and 12 negatives,
with 6 true positives and 3 false positives.
"""

from bagforest.metrics import f1, percent, report, roc_curve

actual = [1] * 8 + [0] * 12
predicted = [1] * 6 + [0] * 2 + [0] * 9 + [1] * 3
rep = report(predicted, actual)
print(rep.confusion)
shown = rep.display()
for block in ("precision_recall_averages", "precision_recall_labels"):
    for name, (p, r) in shown[block].items():
        print(f"{name:<9} precision {p:>4}  recall {r:>4}")
print("kappa", round(rep.kappa, 4))

###############################################################################
# Weighted recall is accuracy for two labels.

print(rep.weighted.recall, rep.accuracy)

###############################################################################
# F1 from rounded per-label precision and recall, shown as whole percents.

print(percent(f1(0.93, 0.96)), percent(f1(0.90, 0.81)))

###############################################################################
# ROC from scores; ties between a positive and a negative count half.

curve = roc_curve([0.9, 0.8, 0.7, 0.7, 0.3, 0.2], [1, 1, 0, 1, 0, 0])
for fpr, tpr, thr in curve.points:
    print(f"{thr:>5}  fpr={fpr:.2f}  tpr={tpr:.2f}")
print("AUC", curve.auc)
