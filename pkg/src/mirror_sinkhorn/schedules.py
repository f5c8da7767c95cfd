"""Step-size rules.

Each named constructor matches one convergence guarantee of the solver, so
experiment configs can state exactly which regime they instantiate. All
rules produce strictly positive step sizes for every t >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfigurationError

KINDS = (
    "anytime_sqrt",
    "constant_horizon",
    "inverse_t",
    "ot_anytime",
    "ot_constant_epsilon",
    "user_constant",
)


@dataclass(frozen=True)
class StepSchedule:
    """A rule mapping the step index t to a step size.

    ``noise_bound`` folds gradient noise into the Lipschitz constant as
    sqrt(lipschitz^2 + noise^2) for the sqrt-decay and fixed-horizon kinds;
    leave it at 0 for deterministic gradients.
    """

    kind: str
    lipschitz_bound: float | None = None
    noise_bound: float = 0.0
    radius: float | None = None
    strong_convexity: float | None = None
    horizon: int | None = None
    epsilon: float | None = None
    value: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown schedule kind {self.kind!r}")
        if not math.isfinite(self.noise_bound) or self.noise_bound < 0.0:
            raise ConfigurationError("noise_bound must be finite and nonnegative")
        needed = {
            "anytime_sqrt": ("lipschitz_bound", "radius"),
            "constant_horizon": ("lipschitz_bound", "radius", "horizon"),
            "inverse_t": ("strong_convexity",),
            "ot_anytime": ("radius",),
            "ot_constant_epsilon": ("epsilon", "radius"),
            "user_constant": ("value",),
        }[self.kind]
        for name in needed:
            v = getattr(self, name)
            if v is None:
                raise ConfigurationError(f"schedule kind {self.kind!r} requires {name}")
            if not math.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def anytime_sqrt(cls, lipschitz_bound, radius, noise_bound=0.0):
        """sqrt(radius/t) decay, scaled by the (noise-folded) Lipschitz bound."""
        return cls("anytime_sqrt", lipschitz_bound=lipschitz_bound, radius=radius,
                   noise_bound=noise_bound)

    @classmethod
    def constant_horizon(cls, lipschitz_bound, radius, horizon, noise_bound=0.0):
        """Constant sqrt(2*radius/T) rule for a known horizon T."""
        return cls("constant_horizon", lipschitz_bound=lipschitz_bound, radius=radius,
                   horizon=horizon, noise_bound=noise_bound)

    @classmethod
    def inverse_t(cls, strong_convexity):
        """1/(strong_convexity * t), for strongly convex objectives."""
        return cls("inverse_t", strong_convexity=strong_convexity)

    @classmethod
    def ot_anytime(cls, radius, noise_bound=0.0):
        """sqrt(radius/((1+noise^2) t)) for streamed cost matrices with sup-norm <= 1."""
        return cls("ot_anytime", radius=radius, noise_bound=noise_bound)

    @classmethod
    def ot_constant_epsilon(cls, epsilon, radius, noise_bound=0.0):
        """Constant epsilon*sqrt(radius/(1+noise^2)); pair with min_horizon_for_epsilon."""
        return cls("ot_constant_epsilon", epsilon=epsilon, radius=radius,
                   noise_bound=noise_bound)

    @classmethod
    def user_constant(cls, value):
        return cls("user_constant", value=value)

    def eta(self, t: int) -> float:
        """Step size at step index ``t`` (1-based)."""
        if t < 1:
            raise ValueError(f"step index must be >= 1, got {t}")
        if self.kind == "anytime_sqrt":
            b_eff = math.hypot(self.lipschitz_bound, self.noise_bound)
            return math.sqrt(self.radius / t) / b_eff
        if self.kind == "constant_horizon":
            b_eff = math.hypot(self.lipschitz_bound, self.noise_bound)
            return math.sqrt(2.0 * self.radius / self.horizon) / b_eff
        if self.kind == "inverse_t":
            return 1.0 / (self.strong_convexity * t)
        if self.kind == "ot_anytime":
            return math.sqrt(self.radius / ((1.0 + self.noise_bound**2) * t))
        if self.kind == "ot_constant_epsilon":
            return self.epsilon * math.sqrt(self.radius / (1.0 + self.noise_bound**2))
        return self.value


def min_horizon_for_epsilon(epsilon: float, noise_bound: float, radius: float) -> int:
    """Smallest step count guaranteeing epsilon accuracy for the constant OT rule.

    ceil(5 (1 + noise^2) radius / epsilon^2).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    return math.ceil(5.0 * (1.0 + noise_bound**2) * radius / epsilon**2)
