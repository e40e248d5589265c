"""Fractional exterior calculus: differintegrals, fractional forms,
coordinate transformations and covariant derivatives."""

from .coords import CHARTS, CoordMap, chart, jacobian, make_chart, matrix_order_jacobian, metric, polar_example
from .covariant import connection_functional, covariant_direct, matrix_covariant
from .differint import DifferintResult, DifferintSpec, differint, power_rule_oracle, scalar_value
from .errors import FracFormsError
from .exterior import ExteriorSpec, exterior_differint, matrix_exterior_residual, poincare_residual
from .fields import parse
from .forms import FracForm, OrderSignature, SpectrumForm, dim, hodge, inner_product, signature, wedge
from .identities import run_suite
from .matrix_order import MatrixOrder, as_matrix_order, matrix_differint

__version__ = "0.1.0"

__all__ = [
    "CHARTS", "CoordMap", "chart", "jacobian", "make_chart", "matrix_order_jacobian", "metric", "polar_example",
    "connection_functional", "covariant_direct", "matrix_covariant",
    "DifferintResult", "DifferintSpec", "differint", "power_rule_oracle", "scalar_value",
    "FracFormsError",
    "ExteriorSpec", "exterior_differint", "matrix_exterior_residual", "poincare_residual",
    "parse",
    "FracForm", "OrderSignature", "SpectrumForm", "dim", "hodge", "inner_product", "signature", "wedge",
    "run_suite",
    "MatrixOrder", "as_matrix_order", "matrix_differint",
]
