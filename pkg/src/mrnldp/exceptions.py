class StructureError(ValueError):
    """Objects defined over incompatible index sets or with the wrong shape."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class BudgetError(RuntimeError):
    """Exact enumeration refused because the configuration count is too large."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration needs {required} configurations, budget is {budget}"
        )
