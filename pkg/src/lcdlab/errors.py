class GuardError(RuntimeError):
    """A request exceeds a configured size or resource limit."""
