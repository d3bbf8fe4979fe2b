"""FETI solver for nonlocal diffusion and bond-based peridynamics.

Settings use the config-file keys, e.g. ``{"kernel.family": "fractional",
"mesh.n": 16}``; values are converted with ``str``.
"""
from os import fspath

from . import _nlfeti
from ._nlfeti import ConfigError, study_csv_header

__all__ = ["ConfigError", "assemble", "mesh", "solve", "study", "study_csv_header", "subdivide", "to_scipy"]


def _settings(settings):
    return {str(k): str(v) for k, v in (settings or {}).items()}


def _path(config):
    return fspath(config) if config is not None else ""


def mesh(n, delta):
    """Structured mesh of the unit square plus its Dirichlet collar."""
    return _nlfeti.mesh(int(n), float(delta))


def solve(config=None, settings=None, export_dir=None):
    """Solve one manufactured problem; returns records, solution and failures."""
    return _nlfeti.solve(_path(config), _settings(settings), _path(export_dir))


def study(config=None, settings=None):
    """Run the study named by the ``study`` key; returns records and failures."""
    return _nlfeti.study(_path(config), _settings(settings))


def assemble(config=None, settings=None):
    """Single-domain system A u = f - B g with CSR parts (see ``to_scipy``)."""
    return _nlfeti.assemble(_path(config), _settings(settings))


def subdivide(config=None, settings=None):
    """Overlapping subdivision: owners, extended element sets, node multiplicities."""
    return _nlfeti.subdivide(_path(config), _settings(settings))


def to_scipy(matrix):
    """Convert a CSR dict from ``assemble`` into ``scipy.sparse.csr_matrix``."""
    from scipy.sparse import csr_matrix

    return csr_matrix((matrix["data"], matrix["indices"], matrix["indptr"]), shape=matrix["shape"])
