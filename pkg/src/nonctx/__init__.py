"""Noncontextuality assumption verification for finite quantum scenarios.

The package decomposes into:

* ``qcore`` / ``linalg``: states, effects, channels, deterministic kernels
* ``ontomodel``: finite ontological models and reproduction checks
* ``relations``: operational/ontological relation pairs and the assumption
  checker
* ``constructions``: the constructive arguments (support closure, the
  four-state witness, antidistinguishing bounds, noise models, effect and
  transformation decompositions)
* ``feasibility``: existence of noncontextual models by exact search
* ``cli``: the ``nonctx`` command line front end
"""

__version__ = "0.1.0"
