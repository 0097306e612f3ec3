"""Expression parsing and jet arithmetic: exact partial derivatives for every formula downstream."""
from .expression import Expression, parse_expression, to_text
from .field import Rect, ScalarField, eval_jet
from .jets import Jet, JetAlgebra, algebra

__all__ = ["Expression", "parse_expression", "to_text", "Rect", "ScalarField", "eval_jet",
           "Jet", "JetAlgebra", "algebra"]
