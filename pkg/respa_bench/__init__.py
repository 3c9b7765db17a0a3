# ResPA Benchmark
# Residual perturbation attack library and transfer benchmark harness
#
# Trains small differentiable classifiers, generates adversarial examples
# with I-FGSM, MI-FGSM and ResPA, and measures how well they transfer.

__version__ = "1.0.0"
__description__ = "Residual perturbation attack benchmark"
