import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_channel(rng, din=2, dout=2):
    """Random CPTP map: random PSD Choi with the input marginal whitened."""
    from chancompat import Channel

    d = din * dout
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    c = g @ g.conj().T
    marg = np.einsum("ikjk->ij", c.reshape(din, dout, din, dout))
    w, v = np.linalg.eigh(marg)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    fix = np.kron(inv_sqrt, np.eye(dout))
    return Channel(din, dout, fix @ c @ fix.conj().T)


def random_basis(rng, d=2):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
