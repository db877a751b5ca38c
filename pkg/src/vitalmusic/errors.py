"""Exception types shared across the pipeline."""


class EstimationError(RuntimeError):
    """An estimator could not produce a trustworthy answer."""


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
