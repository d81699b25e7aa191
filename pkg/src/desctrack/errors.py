"""Exception types shared across the toolkit."""


class DataError(Exception):
    """Invalid input data (malformed files, mismatched counts, bad images).

    The CLI maps this to exit code 2.
    """


class GroundTruthError(DataError):
    """Ground-truth file could not be parsed or validated."""


class SequenceError(DataError):
    """Image sequence could not be loaded or is inconsistent."""


class GenerationError(DataError):
    """Synthetic sequence generation failed (e.g. object left the frame)."""


class TrackInitError(DataError):
    """Tracker initialization failed (too few model keypoints)."""
