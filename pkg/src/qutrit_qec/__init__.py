"""State-vector simulation of a nine-qutrit error-correcting code."""

from .core import (
    OMEGA,
    GateOperator,
    ProductOperator,
    ProjectorFamily,
    QutritRegister,
    apply_gate,
    eigenprojectors_order3,
    fidelity,
    make_register,
    measure,
)

__version__ = "0.1.0"
