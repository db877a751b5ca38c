"""Static clutter removal by background subtraction along slow time."""

import numpy as np

from . import kernels


def remove_static(cube, window=None, causal=True):
    """Subtract a moving-average background from every (antenna, sample) cell.

    Parameters
    ----------
    cube : AdcCube
    window : int, optional
        Averaging length in frames, ``1 <= window <= frames``. Defaults to
        ``cube.config.ns``, clipped to the frame count.
    causal : bool
        ``True``: trailing average over frames ``m - window + 1 .. m``; the
        first ``window - 1`` frames use the frames available so far.
        ``False``: the frames are cut into consecutive blocks of ``window``
        and each block's own mean is removed. With ``window`` equal to the
        frame count this is plain mean subtraction.

    Returns
    -------
    AdcCube
        Same shape as the input.
    """
    frames = cube.n_frames
    if window is None:
        window = min(cube.config.ns, frames)
    if int(window) != window or not 1 <= window <= frames:
        raise ValueError(f"window must be an integer in [1, {frames}], got {window!r}")
    window = int(window)
    if window == 1:
        # every sample is its own background; skip the running-sum rounding
        return cube.with_data(np.zeros_like(cube.data))
    if causal:
        return cube.with_data(kernels.trailing_mean_subtract(cube.data, window))
    out = np.empty_like(cube.data)
    for start in range(0, frames, window):
        block = cube.data[start:start + window]
        out[start:start + window] = block - block.mean(axis=0, keepdims=True)
    return cube.with_data(out)
