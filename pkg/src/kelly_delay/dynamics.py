"""Account-value dynamics for the high-frequency trader and the buy-and-holder.

Prices are normalised to ``S(0) = 1``. Orders are expressed in shares; with a
one-step delay an order placed at stage ``k`` fills at ``S(k+1)``.

Two layers live here:

* per-path ``Trajectory`` builders (:func:`hf_no_delay` and friends), written
  as plain stage-by-stage loops that record every quantity;
* :func:`log_growth`, a vectorised evaluator of ``(1/n) log(V(n)/V(0))`` over
  a matrix of return paths, used by the ELG estimators.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .returns import ReturnModel, ReturnPath

# relative slack for I(k) <= V(k) at the boundary K = 1/(1+x_max)
SELF_FINANCING_SLACK = 1e-9


class Strategy(str, enum.Enum):
    HIGH_FREQUENCY = "high_frequency"
    BUY_AND_HOLD = "buy_and_hold"


class Delay(str, enum.Enum):
    NONE = "none"
    ONE_STEP = "one_step"


class Financing(str, enum.Enum):
    SELF_FINANCED = "self_financed"
    LEVERAGED = "leveraged"


class ConfigError(ValueError):
    """Raised for an inadmissible trade configuration."""


@dataclass(frozen=True)
class TradeConfig:
    strategy: Strategy
    delay: Delay
    K: float
    n: int
    V0: float = 1.0
    financing: Financing = Financing.SELF_FINANCED

    def __post_init__(self):
        for name, typ in (("strategy", Strategy), ("delay", Delay), ("financing", Financing)):
            object.__setattr__(self, name, typ(getattr(self, name)))
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if not self.V0 > 0:
            raise ConfigError("V0 must be positive")
        if not 0.0 <= self.K <= 1.0:
            raise ConfigError(f"K must lie in [0, 1] (long-only, at most fully invested), got {self.K}")

    def replace(self, **changes) -> "TradeConfig":
        fields = dict(
            strategy=self.strategy, delay=self.delay, K=self.K, n=self.n,
            V0=self.V0, financing=self.financing,
        )
        fields.update(changes)
        return TradeConfig(**fields)

    def validate_for(self, model: ReturnModel):
        """Raise :class:`ConfigError` if ``K`` is outside the admissible interval."""
        lo, hi = admissible_interval(model, self.delay, self.financing)
        if not lo <= self.K <= hi * (1 + SELF_FINANCING_SLACK):
            raise ConfigError(
                f"K={self.K} outside admissible interval [{lo}, {hi}] "
                f"for delay={self.delay.value}, financing={self.financing.value}"
            )


def admissible_interval(model: ReturnModel, delay, financing) -> tuple[float, float]:
    if Delay(delay) is Delay.ONE_STEP and Financing(financing) is Financing.SELF_FINANCED:
        return 0.0, 1.0 / (1.0 + model.x_max)
    return 0.0, 1.0


@dataclass
class Trajectory:
    """Account history along one return path.

    ``investments[k]`` is the dollar value of the stock position held over the
    step ``k -> k+1``; ``executed[k]`` marks the stages where an order filled.
    ``orders[k]`` is the number of shares ordered at stage ``k``.
    """

    values: np.ndarray
    orders: np.ndarray
    investments: np.ndarray
    executed: np.ndarray
    prices: np.ndarray
    ruined: bool = False

    @property
    def final_value(self) -> float:
        return float(self.values[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["stage", "V", "N", "I"])
        n = len(self.orders)
        for k in range(n + 1):
            if k < n:
                writer.writerow([k, repr(float(self.values[k])), repr(float(self.orders[k])),
                                 repr(float(self.investments[k]))])
            else:
                writer.writerow([k, repr(float(self.values[k])), "", ""])
        return buf.getvalue()


def _returns(path) -> np.ndarray:
    x = path.returns if isinstance(path, ReturnPath) else path
    return np.asarray(x, dtype=float)


def _prices(x: np.ndarray) -> np.ndarray:
    return np.concatenate(([1.0], np.cumprod(1.0 + x)))


def hf_no_delay(path, K: float, V0: float = 1.0) -> Trajectory:
    """Rebalance to ``I(k) = K V(k)`` at every stage, filled immediately."""
    x = _returns(path)
    n = len(x)
    S = _prices(x)
    V = np.empty(n + 1)
    I = np.empty(n)
    V[0] = V0
    for k in range(n):
        I[k] = K * V[k]
        V[k + 1] = V[k] + I[k] * x[k]
    return Trajectory(V, I / S[:-1], I, np.ones(n, dtype=bool), S, ruined=bool(np.any(V <= 0)))


def bh_no_delay(path, K: float, V0: float = 1.0) -> Trajectory:
    """Buy ``K V0 / S(0)`` shares at stage 0 and hold them."""
    x = _returns(path)
    n = len(x)
    S = _prices(x)
    shares = K * V0 / S[0]
    V = np.empty(n + 1)
    V[0] = V0
    for k in range(n):
        V[k + 1] = V[k] + shares * (S[k + 1] - S[k])
    orders = np.zeros(n)
    orders[0] = shares
    executed = np.zeros(n, dtype=bool)
    executed[0] = True
    return Trajectory(V, orders, shares * S[:-1], executed, S, ruined=bool(np.any(V <= 0)))


def hf_with_delay(path, K: float, V0: float = 1.0) -> Trajectory:
    """High-frequency trader whose share orders fill one stage late.

    The order ``N(k) = K V(k) / S(k)`` fills at ``S(k+1)``, so the position
    held over ``k -> k+1`` (``k >= 1``) is ``N(k-1) S(k) = K (1+X(k-1)) V(k-1)``.
    Nothing is held over the first step. The order placed at stage ``n-1``
    is recorded but never fills within the horizon.
    """
    x = _returns(path)
    n = len(x)
    S = _prices(x)
    V = np.empty(n + 1)
    N = np.empty(n)
    I = np.zeros(n)
    executed = np.zeros(n, dtype=bool)
    V[0] = V0
    V[1] = V0
    N[0] = K * V[0] / S[0]
    for k in range(1, n):
        N[k] = K * V[k] / S[k]
        I[k] = N[k - 1] * S[k]
        executed[k] = True
        V[k + 1] = V[k] + N[k - 1] * (S[k + 1] - S[k])
    return Trajectory(V, N, I, executed, S, ruined=bool(np.any(V <= 0)))


def bh_with_delay(path, K: float, V0: float = 1.0) -> Trajectory:
    """Buy-and-holder whose single order (placed at stage 0) fills at ``S(1)``."""
    x = _returns(path)
    n = len(x)
    S = _prices(x)
    shares = K * V0 / S[0]
    V = np.empty(n + 1)
    I = np.zeros(n)
    executed = np.zeros(n, dtype=bool)
    V[0] = V0
    V[1] = V0
    for k in range(1, n):
        I[k] = shares * S[k]
        V[k + 1] = V[k] + shares * (S[k + 1] - S[k])
    if n > 1:
        executed[1] = True
    orders = np.zeros(n)
    orders[0] = shares
    return Trajectory(V, orders, I, executed, S, ruined=bool(np.any(V <= 0)))


def bh_with_delay_final(path, K: float, V0: float = 1.0) -> float:
    """Closed-form ``V(n)`` for the delayed buy-and-holder."""
    x = _returns(path)
    return V0 * (1.0 + K * (1.0 + x[0]) * (np.prod(1.0 + x[1:]) - 1.0))


def bh_no_delay_final(path, K: float, V0: float = 1.0) -> float:
    x = _returns(path)
    return V0 * (1.0 + K * (np.prod(1.0 + x) - 1.0))


_SIMULATORS = {
    (Strategy.HIGH_FREQUENCY, Delay.NONE): hf_no_delay,
    (Strategy.BUY_AND_HOLD, Delay.NONE): bh_no_delay,
    (Strategy.HIGH_FREQUENCY, Delay.ONE_STEP): hf_with_delay,
    (Strategy.BUY_AND_HOLD, Delay.ONE_STEP): bh_with_delay,
}


def simulate(path, cfg: TradeConfig) -> Trajectory:
    x = _returns(path)
    if len(x) != cfg.n:
        raise ConfigError(f"path has {len(x)} stages, config expects n={cfg.n}")
    return _SIMULATORS[cfg.strategy, cfg.delay](x, cfg.K, cfg.V0)


@dataclass(frozen=True)
class Violation:
    stage: int
    kind: str  # "short", "overdrawn" or "negative_value"
    investment: float
    value: float


def check_constraints(traj: Trajectory, financing=Financing.SELF_FINANCED) -> list[Violation]:
    """List every stage breaking long-only or self-financing.

    Long-only (``I >= 0``) and solvency (``V >= 0``) are checked in both
    financing modes; ``I <= V`` only when self-financed.
    """
    financing = Financing(financing)
    report = []
    for k in np.flatnonzero(traj.executed):
        I, V = float(traj.investments[k]), float(traj.values[k])
        if I < 0:
            report.append(Violation(int(k), "short", I, V))
        if financing is Financing.SELF_FINANCED and I > V + SELF_FINANCING_SLACK * abs(V):
            report.append(Violation(int(k), "overdrawn", I, V))
    for k, V in enumerate(traj.values):
        if V < 0:
            report.append(Violation(k, "negative_value", float("nan"), float(V)))
    return report


# -- vectorised evaluation --------------------------------------------------


def final_values(X: np.ndarray, cfg: TradeConfig) -> tuple[np.ndarray, np.ndarray]:
    """``V(n)/V(0)`` and a ruin mask for every row of the path matrix ``X``.

    A path is ruined when the account value is nonpositive at any stage.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    if n != cfg.n:
        raise ConfigError(f"paths have {n} stages, config expects n={cfg.n}")
    K = cfg.K
    gross = 1.0 + X

    if cfg.delay is Delay.NONE:
        if cfg.strategy is Strategy.HIGH_FREQUENCY:
            steps = 1.0 + K * X
            ratio = np.prod(steps, axis=1)
            ruined = np.any(steps <= 0, axis=1)
        else:
            growth = np.cumprod(gross, axis=1)
            ratio = 1.0 + K * (growth[:, -1] - 1.0)
            ruined = (1.0 + K * (growth.min(axis=1) - 1.0)) <= 0
        return ratio, ruined

    if cfg.strategy is Strategy.BUY_AND_HOLD:
        lever = K * gross[:, 0]
        if n == 1:
            return np.ones(m), np.zeros(m, dtype=bool)
        growth = np.cumprod(gross[:, 1:], axis=1)
        ratio = 1.0 + lever * (growth[:, -1] - 1.0)
        ruined = (1.0 + lever * (growth.min(axis=1) - 1.0)) <= 0
        return ratio, ruined

    prev = np.ones(m)
    cur = np.ones(m)
    ruined = np.zeros(m, dtype=bool)
    for k in range(1, n):
        prev, cur = cur, cur + K * gross[:, k - 1] * prev * X[:, k]
        ruined |= cur <= 0
    return cur, ruined


def log_growth(X: np.ndarray, cfg: TradeConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-path ``(1/n) log(V(n)/V(0))``; ruined paths map to ``-inf``."""
    ratio, ruined = final_values(X, cfg)
    out = np.full(ratio.shape, -np.inf)
    ok = ~ruined
    out[ok] = np.log(ratio[ok]) / cfg.n
    return out, ruined
