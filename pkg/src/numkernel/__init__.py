# Dense numeric kernel: layers, focal loss, AdamW, gradient checking
from .layers import (
    Matrix, as_matrix, Activation, activation_apply, Param, DenseLayer, DenseStack, dense_apply,
)
from .losses import focal_loss, PROB_EPS
from .optim import AdamW, AdamWState, adamw_step
from .gradcheck import grad_check, relative_error

__all__ = [
    "Matrix", "as_matrix", "Activation", "activation_apply", "Param", "DenseLayer", "DenseStack",
    "dense_apply", "focal_loss", "PROB_EPS", "AdamW", "AdamWState", "adamw_step", "grad_check",
    "relative_error",
]
