"""mtlab: a numerical laboratory for weighted extension-operator and
refined-decoupling inequalities along well-curved curves."""

__version__ = "0.1.0"
