"""Kahan discretisation laboratory for planar cubic Hamiltonian systems.

Subpackages by responsibility:

* :mod:`kahanlab.polycore`  -- exact/floating polynomial arithmetic, lines,
  resultants, root finding, identity testing;
* :mod:`kahanlab.khk`       -- cubic Hamiltonians, quadratic fields, the
  birational discretisation map, its rational invariant and preserved measure;
* :mod:`kahanlab.pencil`    -- the invariant's cubic pencil: base points,
  singular fibres by two independent routes, fibre classification;
* :mod:`kahanlab.hexagon`   -- reconstruction of the invariant as a ratio of
  products of affine lines, parameter maps, continuum-limit checks, and the
  gauged quadratic (conic pencil) variant;
* :mod:`kahanlab.darboux`   -- Darboux polynomial certificates: cofactor
  extraction, pair identities, invariant discovery;
* :mod:`kahanlab.lab_cli`   -- configuration loading, reports and the
  command line interface.
"""

__version__ = "0.1.0"

from . import polycore  # noqa: F401
