# src/pendulum_control/control_framework/core/base_plant.py

from abc import ABC, abstractmethod
import logging

from pendulum_control.control_framework.core.dynamics import PendulumParams, State, step_euler


class BasePlant(ABC):
    """
    Abstract base class for plants driven by a discrete controller. Plants follow a
    simple lifecycle:
    - reset() to an initial state
    - measure() the state as the sensor reports it
    - step() with a torque held for one control period
    - cleanup() free resources if needed
    """
    def __init__(self, params: PendulumParams, dt: float, substeps: int = 1):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.params = params
        self.dt = dt
        self.substeps = substeps
        self._state = None

    @property
    def period(self) -> float:
        """Duration of one control period in seconds."""
        return self.substeps * self.dt

    @property
    def state(self) -> State:
        if self._state is None:
            raise RuntimeError(f"{self.__class__.__name__} used before reset()")
        return self._state

    def reset(self, s0: State):
        """Place the plant at s0."""
        self._state = s0

    @abstractmethod
    def measure(self) -> State:
        """Return the state as seen by the controller."""
        pass

    def step(self, u: float) -> State:
        """Hold torque u for one control period and return the new true state."""
        s = self.state
        for _ in range(self.substeps):
            s = step_euler(self.params, s, u, self.dt)
        self._state = s
        return s

    def cleanup(self):
        """Cleanup resources if needed. May be overridden by subclasses."""
        pass


class SimulatedPendulum(BasePlant):
    """The ideal model: full-rate, noiseless sensing of the true state."""

    def measure(self) -> State:
        return self.state
