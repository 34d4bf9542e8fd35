class InvalidGameError(ValueError):
    """A game, selector or state set failed validation."""

    def __init__(self, violations, message=None):
        self.violations = list(violations)
        super().__init__(message or "; ".join(map(str, self.violations)))


class ResourceLimitError(RuntimeError):
    """An enumeration exceeded its configured budget."""

    def __init__(self, what, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"{what}: {count} exceeds budget {limit}")
