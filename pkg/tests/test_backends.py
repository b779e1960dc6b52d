"""Equivalence of the compiled correlation kernel and the numpy fallback."""

import math

import numpy as np
import pytest

from smallprint import Image, rotate_image
from smallprint.errors import ParameterError
from smallprint.zncc import (compiled_backend_available, correlation_surface,
                             default_backend)

needs_compiled = pytest.mark.skipif(
    not compiled_backend_available(),
    reason="compiled kernel not built")


def _random_cases(rng):
    cases = []
    for _ in range(4):
        e = Image(rng.random((13, 11)))
        c = Image(rng.random((9, 12)), rng.random((9, 12)) > 0.3)
        cases.append((e, c))
    for angle in (8.0, -25.0, 33.0):
        c = rotate_image(Image(rng.random((40, 40))), math.radians(angle))
        cases.append((Image(rng.random((40, 40))), c))
    cases.append((Image(rng.random((16, 16))), Image(rng.random((16, 16)))))
    # masked reference image exercises the kernel's general path
    e = Image(rng.random((12, 12)), rng.random((12, 12)) > 0.2)
    cases.append((e, Image(rng.random((12, 12)))))
    return cases


@needs_compiled
def test_backends_agree_within_1e9(rng):
    for e, c in _random_cases(rng):
        sp = correlation_surface(e, c, 0.25, backend="python")
        sc = correlation_surface(e, c, 0.25, backend="compiled")
        assert np.array_equal(sp.valid, sc.valid)
        assert np.array_equal(sp.overlap_counts, sc.overlap_counts)
        assert np.abs(sp.values[sp.valid] - sc.values[sc.valid]).max() < 1e-9


@needs_compiled
def test_env_var_forces_backend(monkeypatch):
    monkeypatch.setenv("SMALLPRINT_ZNCC_BACKEND", "python")
    assert default_backend() == "python"
    monkeypatch.setenv("SMALLPRINT_ZNCC_BACKEND", "compiled")
    assert default_backend() == "compiled"
    monkeypatch.setenv("SMALLPRINT_ZNCC_BACKEND", "turbo")
    with pytest.raises(ParameterError):
        default_backend()


def test_unknown_backend_rejected(rng):
    e = Image(rng.random((6, 6)))
    with pytest.raises(ParameterError):
        correlation_surface(e, e, 0.25, backend="fft")
