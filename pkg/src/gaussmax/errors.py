class DomainError(ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to meet its tolerance.

    ``payload`` carries whatever diagnostic the solver could salvage
    (a trajectory, a scanned curve, a best-found point).
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload
