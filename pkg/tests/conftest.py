import os

import numpy as np
import pytest

import fiberspec as fs

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "..", "configs", "trig_rank3.json")


def curve1(w):
    return np.cos(np.pi * w / 2) ** 2


def curve2(w):
    return 0.5 * np.sin(np.pi * w) ** 2


def curve3(w):
    return w**2 / 3


def phi(n, t):
    return np.sqrt(2.0) * np.sin(n * np.pi * t)


def f_ref(w, t):
    # w column, t row
    return w * np.sin(np.pi * t) + np.sin(2 * np.pi * t)


def tf_ref(w, t):
    return w * curve1(w) * np.sin(np.pi * t) + curve2(w) * np.sin(2 * np.pi * t)


def t2f_ref(w, t):
    return w * curve1(w) ** 2 * np.sin(np.pi * t) + curve2(w) ** 2 * np.sin(
        2 * np.pi * t
    )


@pytest.fixture(scope="session")
def cfg():
    return fs.load_config(CONFIG_PATH)


@pytest.fixture(scope="session")
def decomposition(cfg):
    return fs.decompose(cfg)


@pytest.fixture()
def grids():
    return fs.build_omega_grid(16), fs.build_s_quadrature("gauss_legendre", 24)
