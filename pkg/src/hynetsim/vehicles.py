"""Abstract vehicle layer shared by cars, UAVs and fixed infrastructure.

Communication and prediction code only sees this interface, so it never
branches on the vehicle kind.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

MAX_SPEED = {"car": 14.0, "uav": 20.0, "infrastructure": 0.0}


@dataclass
class Waypoint:
    """A 3D target with an arrival radius."""

    target: np.ndarray
    radius: float = 2.0

    def __post_init__(self) -> None:
        self.target = np.asarray(self.target, dtype=float)
        if self.radius <= 0:
            raise ValueError("arrival radius must be positive")


class Vehicle:
    """Base vehicle: identity, kinematic state, waypoint queue.

    ``step`` is a no-op here (infrastructure never moves); Car and Uav
    override it. State is mutated only from the owner's mobility events,
    every other module reads snapshots.
    """

    kind = "infrastructure"

    def __init__(self, vehicle_id, position, world=None, max_speed=None,
                 history_length: int = 5) -> None:
        self.id = vehicle_id
        self.world = world
        self.position = np.asarray(position, dtype=float).copy()
        self.velocity = np.zeros(3)
        self.acceleration = np.zeros(3)
        self.waypoints: deque[Waypoint] = deque()
        self.battery = None
        self.radio = None
        self.max_speed = MAX_SPEED[self.kind] if max_speed is None else max_speed
        self.position_history: deque[np.ndarray] = deque(maxlen=history_length + 1)
        self.position_history.append(self.position.copy())
        self.prediction_step_s = 0.5
        self._bounds_warned = False
        self.removed = False

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def kinematic_snapshot(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Immutable (position, velocity, acceleration) copies."""
        return (self.position.copy(), self.velocity.copy(),
                self.acceleration.copy())

    def add_waypoint(self, target, radius: float = 2.0) -> None:
        self.waypoints.append(Waypoint(np.asarray(target, dtype=float), radius))

    @property
    def current_waypoint(self) -> Waypoint | None:
        return self.waypoints[0] if self.waypoints else None

    def upcoming_waypoints(self) -> list[Waypoint]:
        """Waypoint queue as seen by the predictor (kind-specific overrides)."""
        return list(self.waypoints)

    def step(self, dt: float, ctx=None) -> None:
        """Advance the vehicle by dt seconds. Infrastructure holds position."""

    def predict(self, horizon: float, **kwargs):
        """Uniform prediction interface; same call on every vehicle kind."""
        from .prediction import predict_track

        return predict_track(self, horizon, **kwargs)

    def prediction_steering(self) -> np.ndarray | None:
        """Most recent aggregated steering vector, if the kind has one."""
        return None

    def _enforce_state_limits(self) -> None:
        """Clamp speed to the kind maximum and position into world bounds."""
        speed = self.speed
        if speed > self.max_speed:
            self.velocity *= self.max_speed / speed
        if self.world is not None and not self.world.contains(self.position):
            if not self._bounds_warned:
                logger.warning("vehicle %s left world bounds at %s; clamping",
                               self.id, self.position)
                self._bounds_warned = True
            self.position = self.world.clamp(self.position)

    def record_history(self) -> None:
        self.position_history.append(self.position.copy())

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.id}, p={np.round(self.position, 2)})"


class Infrastructure(Vehicle):
    """A fixed radio site (eNB) modeled as a zero-mobility vehicle."""

    kind = "infrastructure"
