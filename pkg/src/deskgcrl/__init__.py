"""Desk-scale offline goal-conditioned RL engine.

Subpackages: ``diffcore`` (autodiff, MLPs, Adam), ``envs`` (grid maze,
lights-out puzzle, falling-powder grid), ``datagen`` (scripted experts and
dataset files), ``goalsampling`` (hindsight goal distributions), ``agents``
(the six reference algorithms), ``evalharness`` (multi-goal protocol), and
``cli`` (reproducible runs).
"""

__version__ = "0.1.0"
