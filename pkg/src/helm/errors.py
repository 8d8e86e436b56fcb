"""Exception types shared across the toolkit.

Every error that can cross the service boundary carries a stable machine
code so the HTTP layer can map it without string matching.
"""


class HelmError(Exception):
    """Base class; `code` is the machine-readable identifier."""

    code = "error"


class NetworkFormatError(HelmError):
    """Document cannot be parsed into a network; `location` points at the
    offending line or field."""

    code = "invalid-document"

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


class InvalidNetworkError(HelmError):
    """Network violates a structural invariant; carries the full report."""

    code = "invalid-network"

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(p.message for p in report.errors))


class InvalidModelError(HelmError):
    """Feature model violates its schema or semantic constraints."""

    code = "invalid-model"

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownNodeError(HelmError):
    code = "unknown-node"


class UnknownStateError(HelmError):
    code = "unknown-state"


class NotAskableError(HelmError):
    code = "not-askable"


class InconsistentEvidenceError(HelmError):
    """Posted evidence excludes all joint probability mass."""

    code = "inconsistent-evidence"


class DegenerateLinkError(HelmError):
    """Evidential link whose antecedent prior makes the anchors collapse."""

    code = "invalid-link"


class StaleReadError(HelmError):
    """Belief queried while the propagation agenda is non-empty."""

    code = "stale-read"


class EnumerationLimitError(HelmError):
    """Joint state space too large for the exact enumeration oracle."""

    code = "enumeration-limit"


class NonConvergenceError(HelmError):
    """Propagation exceeded the activation cap without settling."""

    code = "non-convergence"


class SessionStateError(HelmError):
    """Operation not allowed in the session's current status."""

    code = "session-stopped"


class QuestionStateError(HelmError):
    """Question already answered or otherwise not currently poseable."""

    code = "question-unavailable"


class EvidenceFormError(HelmError):
    """Evidence form not supported by the target engine or node."""

    code = "invalid-evidence-form"
