"""Errors shared by the evaluation harness."""


class EvaluationError(ValueError):
    pass


class EmptyInput(EvaluationError):
    pass


class LengthMismatch(EvaluationError):
    pass


class NoOverlap(EvaluationError):
    pass


class JudgeUnparseable(EvaluationError):
    pass
