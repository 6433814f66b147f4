"""
Lambda measures

A finite measure Lambda on [0,1) made of a Kingman atom at 0, finitely many
atoms on (0,1) and an optional density. From it the module derives
nu(du) = u^-2 Lambda(du), the exponent Psi, the merger rates lambda_{m,p},
the regime classification and the coming-down-from-infinity speed v(t).
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy import integrate, optimize, special

from .errors import DomainError, MeasureError, NumericalError, UndecidedError
from .log import get_logger
from .models import (
    QUADRATURE_RTOL,
    IntegralValue,
    MeasureFamily,
    MeasureSpec,
    Regime,
    RegimeClass,
)

logger = get_logger("measure")

SHELL_COUNT = 60
SHELL_WINDOW = 20
SHELL_CONVERGENT_RATIO = 0.9
SHELL_DIVERGENT_RATIO = 0.95

# log-grid used to tabulate G(v) = int_v^inf du / Psi(u)
TAIL_GRID_LOW = 1e-6
TAIL_GRID_HIGH = 1e30
TAIL_GRID_STEP = 0.05


def _phi(y: float) -> float:
    """e^-y - 1 + y without cancellation for small y"""
    if y < 1e-3:
        return y * y * (0.5 - y * (1.0 / 6.0 - y * (1.0 / 24.0 - y / 120.0)))
    return math.expm1(-y) + y


def _quad(func: Callable[[float], float], left: float, right: float, **kwargs: Any) -> float:
    """scipy quad with library tolerances; non-convergence becomes NumericalError"""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                func, left, right, epsabs=1e-300, epsrel=QUADRATURE_RTOL / 10, limit=200, **kwargs
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(
                f"Quadrature did not converge on [{left!r}, {right!r}]",
                diagnostics={"left": left, "right": right, "message": str(exc)},
            )
    return value


@dataclass(frozen=True)
class Density:
    """Density f(u) = u^low (1-u)^high g(u) on (0,1) with g bounded

    The algebraic endpoint factors are handed to the quadrature as weights, so
    integrable singularities at 0 and 1 cost nothing.
    """

    smooth: Callable[[float], float]
    low: float = 0.0
    high: float = 0.0
    beta_params: Optional[Tuple[float, float]] = None
    table: Optional[Tuple[Tuple[float, float], ...]] = None
    breakpoints: Tuple[float, ...] = ()

    def __call__(self, u: float) -> float:
        if u <= 0.0 or u >= 1.0:
            return 0.0
        value = self.smooth(u)
        if self.low:
            value *= u ** self.low
        if self.high:
            value *= (1.0 - u) ** self.high
        return value

    def integrate(
        self,
        g: Callable[[float], float],
        lo: float = 0.0,
        hi: float = 1.0,
        points: Sequence[float] = (),
    ) -> float:
        """int_lo^hi g(u) f(u) du, split at the given points and the density's own breakpoints"""
        cuts = sorted({lo, hi, *(p for p in (*points, *self.breakpoints) if lo < p < hi)})
        return math.fsum(self._piece(g, left, right) for left, right in zip(cuts, cuts[1:]))

    def _piece(self, g: Callable[[float], float], left: float, right: float) -> float:
        weight_low = self.low if left == 0.0 else 0.0
        weight_high = self.high if right == 1.0 else 0.0
        low, high, smooth = self.low, self.high, self.smooth

        def func(u: float) -> float:
            value = g(u) * smooth(u)
            if low and not weight_low:
                value *= u ** low
            if high and not weight_high:
                value *= (1.0 - u) ** high
            return value

        if weight_low or weight_high:
            return _quad(func, left, right, weight="alg", wvar=(weight_low, weight_high))
        return _quad(func, left, right)


@dataclass(frozen=True, eq=False)
class LambdaMeasure:
    """Finite measure Lambda on [0,1) with Lambda({1}) = 0"""

    kingman_mass: float = 0.0
    atoms: Tuple[Tuple[float, float], ...] = ()
    density: Optional[Density] = None
    label: str = "custom"
    spec: Optional[MeasureSpec] = None
    _cache: Dict[Any, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.kingman_mass) or self.kingman_mass < 0.0:
            raise MeasureError(f"Kingman mass must be finite and non-negative, got {self.kingman_mass}")
        for x, w in self.atoms:
            if not 0.0 < x < 1.0:
                raise MeasureError(f"Atom locations must lie in (0,1), got {x}")
            if not math.isfinite(w) or w <= 0.0:
                raise MeasureError(f"Atom masses must be positive, got {w}")

    @property
    def is_kingman_only(self) -> bool:
        return not self.atoms and self.density is None

    @property
    def total_mass(self) -> float:
        total = self.kingman_mass + math.fsum(w for _, w in self.atoms)
        if self.density is not None:
            total += self.density.integrate(lambda u: 1.0)
        return total

    def psi(self, u: float) -> float:
        return psi(self, u)

    def lambda_rate(self, m_blocks: int, p: int) -> float:
        return lambda_rate(self, m_blocks, p)

    def merger_weights(self, b: int) -> np.ndarray:
        return merger_weights(self, b)

    def total_rate(self, b: int) -> float:
        return float(merger_weights(self, b).sum())

    def classify(self) -> RegimeClass:
        return classify(self)


# ---------------------------------------------------------------------------
# constructors


def dirac0(mass: float = 1.0) -> LambdaMeasure:
    """Kingman measure c * delta_0"""
    return LambdaMeasure(kingman_mass=mass, label="dirac0")


def dirac(x: float, mass: float = 1.0) -> LambdaMeasure:
    """c * delta_x with x in (0,1)"""
    if not 0.0 < x < 1.0:
        raise MeasureError(f"Dirac location must lie in (0,1), got {x}")
    return LambdaMeasure(atoms=((x, mass),), label=f"dirac({x!r})")


def beta_ab(a: float, b: float) -> LambdaMeasure:
    """Beta(a,b) probability density"""
    if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
        raise MeasureError(f"Beta parameters must be positive, got ({a}, {b})")
    norm = math.exp(-special.betaln(a, b))
    density = Density(
        smooth=lambda u: norm, low=a - 1.0, high=b - 1.0, beta_params=(a, b)
    )
    return LambdaMeasure(density=density, label=f"beta({a!r},{b!r})")


def lebesgue() -> LambdaMeasure:
    """Lambda(du) = du, the Bolthausen-Sznitman measure"""
    measure = beta_ab(1.0, 1.0)
    return LambdaMeasure(density=measure.density, label="lebesgue")


def beta(alpha: float) -> LambdaMeasure:
    """Beta(2 - alpha, alpha) with alpha in (0,2)"""
    if not 0.0 < alpha < 2.0:
        raise MeasureError(f"alpha must lie in (0,2), got {alpha}")
    measure = beta_ab(2.0 - alpha, alpha)
    return LambdaMeasure(density=measure.density, label=f"beta(alpha={alpha!r})")


def custom(density_table: Sequence[Tuple[float, float]]) -> LambdaMeasure:
    """Piecewise-linear density through the nodes (u, f(u)), zero outside them"""
    nodes = [(float(u), float(f)) for u, f in density_table]
    if len(nodes) < 2:
        raise MeasureError("A density table needs at least two nodes")
    xs = [u for u, _ in nodes]
    ys = [f for _, f in nodes]
    if xs[0] < 0.0 or xs[-1] > 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
        raise MeasureError("Density nodes must be strictly increasing inside [0,1]")
    if any(not math.isfinite(f) or f < 0.0 for f in ys):
        raise MeasureError("Density values must be finite and non-negative")
    grid_x = np.asarray(xs)
    grid_y = np.asarray(ys)

    def smooth(u: float) -> float:
        return float(np.interp(u, grid_x, grid_y, left=0.0, right=0.0))

    density = Density(smooth=smooth, table=tuple(nodes), breakpoints=tuple(xs))
    return LambdaMeasure(density=density, label="custom")


def make_measure(spec: Union[MeasureSpec, Dict[str, Any]]) -> LambdaMeasure:
    """Builds a measure from its run-config description"""
    if not isinstance(spec, MeasureSpec):
        try:
            spec = MeasureSpec.model_validate(spec)
        except ValidationError as exc:
            raise MeasureError(f"Invalid measure spec: {exc}")
    if spec.family == MeasureFamily.DIRAC0:
        measure = dirac0(spec.mass)
    elif spec.family == MeasureFamily.DIRAC:
        measure = dirac(spec.x, spec.mass)  # type: ignore[arg-type]
    elif spec.family == MeasureFamily.LEBESGUE:
        measure = lebesgue()
    elif spec.family == MeasureFamily.BETA:
        measure = beta(spec.alpha) if spec.alpha is not None else beta_ab(spec.a, spec.b)  # type: ignore[arg-type]
    else:
        measure = custom(spec.density_table)  # type: ignore[arg-type]
    return LambdaMeasure(
        kingman_mass=measure.kingman_mass,
        atoms=measure.atoms,
        density=measure.density,
        label=measure.label,
        spec=spec,
    )


# ---------------------------------------------------------------------------
# Psi and merger rates


def _scale_points(u: float) -> List[float]:
    """Breakpoints c/u (c = 1, 16, 256, ...) below 1/2, where e^-xu changes"""
    points = []
    x = 1.0 / u
    while x < 0.5:
        points.append(x)
        x *= 16.0
    points.append(0.5)
    return points


def psi(m: LambdaMeasure, u: float) -> float:
    """Psi(u) = Lambda({0}) u^2 / 2 + int_(0,1) (e^-xu - 1 + xu) nu(dx)"""
    if u < 0.0 or math.isnan(u):
        raise MeasureError(f"Psi is defined for u >= 0, got {u}")
    if u == 0.0:
        return 0.0
    total = 0.5 * m.kingman_mass * u * u
    total += math.fsum(w * _phi(x * u) / (x * x) for x, w in m.atoms)
    if m.density is not None:

        def integrand(x: float) -> float:
            if x == 0.0:
                return 0.5 * u * u
            return _phi(x * u) / (x * x)

        total += m.density.integrate(integrand, 0.0, 1.0, points=_scale_points(u))
    return total


def lambda_rate(m: LambdaMeasure, m_blocks: int, p: int) -> float:
    """lambda_{m,p} = int u^p (1-u)^(m-p) nu(du): rate at which a given p of m blocks merge"""
    if p < 2 or p > m_blocks:
        raise MeasureError(f"Need 2 <= p <= m, got p={p}, m={m_blocks}")
    rate = m.kingman_mass if p == 2 else 0.0
    rate += math.fsum(w * x ** (p - 2) * (1.0 - x) ** (m_blocks - p) for x, w in m.atoms)
    density = m.density
    if density is not None:
        if density.beta_params is not None:
            a, b = density.beta_params
            rate += math.exp(special.betaln(p - 2 + a, m_blocks - p + b) - special.betaln(a, b))
        else:
            rate += density.integrate(lambda x: x ** (p - 2) * (1.0 - x) ** (m_blocks - p))
    return rate


def merger_weights(m: LambdaMeasure, b: int) -> np.ndarray:
    """C(b,p) lambda_{b,p} for p = 2..b (index p-2)"""
    if b < 2:
        return np.zeros(0)
    p = np.arange(2, b + 1, dtype=float)
    log_binom = special.gammaln(b + 1.0) - special.gammaln(p + 1.0) - special.gammaln(b - p + 1.0)
    weights = np.zeros(b - 1)
    if m.kingman_mass:
        weights[0] += m.kingman_mass * b * (b - 1) / 2.0
    for x, w in m.atoms:
        weights += np.exp(log_binom + math.log(w) + (p - 2.0) * math.log(x) + (b - p) * math.log1p(-x))
    density = m.density
    if density is not None:
        if density.beta_params is not None:
            a, bb = density.beta_params
            log_rate = special.betaln(p - 2.0 + a, b - p + bb) - special.betaln(a, bb)
            weights += np.exp(log_binom + log_rate)
        else:
            key = ("weights", b)
            if key not in m._cache:
                rates = np.array([lambda_rate(LambdaMeasure(density=density), b, int(q)) for q in p])
                m._cache[key] = np.exp(log_binom) * rates
            weights += m._cache[key]
    return weights


# ---------------------------------------------------------------------------
# classification


def _shell_test(shells: Sequence[float], head: float = 0.0) -> IntegralValue:
    """Ratio test on dyadic shell integrals ordered towards the singular end"""
    tail = list(shells[-(SHELL_WINDOW + 1):])
    ratios = []
    for prev, nxt in zip(tail, tail[1:]):
        if prev == 0.0:
            ratios.append(0.0 if nxt == 0.0 else math.inf)
        else:
            ratios.append(nxt / prev)
    detail = {"ratios": [r if math.isfinite(r) else None for r in ratios]}
    worst = max(ratios)
    if worst <= SHELL_CONVERGENT_RATIO:
        extra = shells[-1] * worst / (1.0 - worst)
        return IntegralValue(value=head + math.fsum(shells) + extra, divergent=False, method="shells", detail=detail)
    if min(ratios) >= SHELL_DIVERGENT_RATIO:
        return IntegralValue(divergent=True, method="shells", detail=detail)
    return IntegralValue(divergent=None, method="shells", detail=detail)


def _near_zero_integral(density: Density, g: Callable[[float], float]) -> IntegralValue:
    """int_0^1 g(u) f(u) du for g singular at 0, decided on shells [2^-k-1, 2^-k]"""
    head = density.integrate(g, 0.5, 1.0)
    shells = [density.integrate(g, 2.0 ** (-k - 1), 2.0 ** -k) for k in range(1, SHELL_COUNT + 1)]
    return _shell_test(shells, head)


def _inv_psi_shells(m: LambdaMeasure) -> IntegralValue:
    """int_1^inf du / Psi(u) decided on shells [2^k, 2^k+1]"""
    shells = [_quad(lambda u: 1.0 / psi(m, u), 2.0 ** k, 2.0 ** (k + 1)) for k in range(SHELL_COUNT)]
    result = _shell_test(shells)
    top = 2.0 ** SHELL_COUNT
    result.detail["psi_tail_exponent"] = math.log2(psi(m, 2.0 * top) / psi(m, top))
    return result


def _atom_sums(m: LambdaMeasure) -> Dict[str, float]:
    return {
        "nu_mass": math.fsum(w / (x * x) for x, w in m.atoms),
        "u_nu": math.fsum(w / x for x, w in m.atoms),
        "u_log_u_nu": math.fsum(-w * math.log(x) / x for x, w in m.atoms),
    }


def _divergent(method: str = "analytic") -> IntegralValue:
    return IntegralValue(divergent=True, method=method)


def _finite(value: Optional[float], method: str = "analytic") -> IntegralValue:
    return IntegralValue(value=value, divergent=False, method=method)


def _classify_beta(m: LambdaMeasure, a: float, b: float) -> RegimeClass:
    sums = _atom_sums(m)
    log_norm = special.betaln(a, b)
    report: Dict[str, IntegralValue] = {}
    if a > 2.0:
        report["nu_mass"] = _finite(sums["nu_mass"] + math.exp(special.betaln(a - 2.0, b) - log_norm))
    else:
        report["nu_mass"] = _divergent()
    if a > 1.0:
        report["u_nu"] = _finite(sums["u_nu"] + math.exp(special.betaln(a - 1.0, b) - log_norm))
        digamma_gap = special.digamma(a - 1.0) - special.digamma(a - 1.0 + b)
        report["u_log_u_nu"] = _finite(
            sums["u_log_u_nu"] - math.exp(special.betaln(a - 1.0, b) - log_norm) * digamma_gap
        )
    else:
        report["u_nu"] = _divergent()
        report["u_log_u_nu"] = _divergent()
    if a < 1.0:
        report["inv_psi_tail"] = _finite(None)
        regime = Regime.CDI
    elif a == 1.0:
        report["inv_psi_tail"] = _divergent()
        regime = Regime.INTENSIVE_INF
    elif a <= 2.0:
        report["inv_psi_tail"] = _divergent()
        regime = Regime.INTENSIVE_W_DUST
    else:
        report["inv_psi_tail"] = _divergent()
        regime = Regime.DISCRETE
    u_log_u = True if regime == Regime.INTENSIVE_W_DUST else None
    return RegimeClass(regime=regime, u_log_u_finite=u_log_u, integral_report=report)


def _classify_numeric(m: LambdaMeasure, density: Density) -> RegimeClass:
    sums = _atom_sums(m)
    report: Dict[str, IntegralValue] = {}

    def shifted(value: IntegralValue, extra: float) -> IntegralValue:
        if value.value is not None:
            value.value += extra
        return value

    report["nu_mass"] = shifted(_near_zero_integral(density, lambda u: u ** -2), sums["nu_mass"])
    if report["nu_mass"].divergent is False:
        report["u_nu"] = _finite(sums["u_nu"] + density.integrate(lambda u: 1.0 / u), "quadrature")
        report["inv_psi_tail"] = _divergent("shells")
        return RegimeClass(regime=Regime.DISCRETE, integral_report=report)
    if report["nu_mass"].divergent is None:
        raise UndecidedError("Could not decide whether nu has finite mass", RegimeClass(
            regime=Regime.UNDECIDED, integral_report=report))

    report["u_nu"] = shifted(_near_zero_integral(density, lambda u: 1.0 / u), sums["u_nu"])
    if report["u_nu"].divergent is False:
        report["u_log_u_nu"] = shifted(
            _near_zero_integral(density, lambda u: -math.log(u) / u), sums["u_log_u_nu"]
        )
        report["inv_psi_tail"] = _divergent("shells")
        u_log_u = report["u_log_u_nu"].divergent
        if u_log_u is None:
            raise UndecidedError("Could not decide the u log u condition", RegimeClass(
                regime=Regime.INTENSIVE_W_DUST, integral_report=report))
        return RegimeClass(regime=Regime.INTENSIVE_W_DUST, u_log_u_finite=not u_log_u, integral_report=report)
    if report["u_nu"].divergent is None:
        raise UndecidedError("Could not decide whether u nu(du) is finite", RegimeClass(
            regime=Regime.UNDECIDED, integral_report=report))

    report["inv_psi_tail"] = _inv_psi_shells(m)
    decision = report["inv_psi_tail"].divergent
    if decision is None:
        raise UndecidedError("Could not decide whether int du/Psi converges", RegimeClass(
            regime=Regime.UNDECIDED, integral_report=report))
    regime = Regime.INTENSIVE_INF if decision else Regime.CDI
    return RegimeClass(regime=regime, integral_report=report)


def classify(m: LambdaMeasure) -> RegimeClass:
    """Regime of the measure: DISCRETE, INTENSIVE_W_DUST, INTENSIVE_INF or CDI

    Raises UndecidedError, carrying the partial report, when a divergence test
    is inconclusive.
    """
    if "regime" in m._cache:
        return m._cache["regime"].model_copy(deep=True)
    sums = _atom_sums(m)
    if m.kingman_mass > 0.0:
        tail = 2.0 / m.kingman_mass if m.is_kingman_only else None
        result = RegimeClass(
            regime=Regime.CDI,
            integral_report={
                "nu_mass": _divergent(),
                "u_nu": _divergent(),
                "u_log_u_nu": _divergent(),
                "inv_psi_tail": _finite(tail),
            },
        )
    elif m.density is None:
        result = RegimeClass(
            regime=Regime.DISCRETE,
            integral_report={
                "nu_mass": _finite(sums["nu_mass"]),
                "u_nu": _finite(sums["u_nu"]),
                "u_log_u_nu": _finite(sums["u_log_u_nu"]),
                "inv_psi_tail": _divergent(),
            },
        )
    elif m.density.beta_params is not None:
        result = _classify_beta(m, *m.density.beta_params)
    else:
        result = _classify_numeric(m, m.density)
    logger.debug("Classified %s as %s", m.label, result.regime.value)
    m._cache["regime"] = result
    return result.model_copy(deep=True)


# ---------------------------------------------------------------------------
# coming down from infinity


@dataclass(frozen=True)
class _TailTable:
    """G tabulated on a log grid: nodes u_k and G(u_k)"""

    nodes: np.ndarray
    values: np.ndarray


def _tail_table(m: LambdaMeasure) -> _TailTable:
    if "tail" in m._cache:
        return m._cache["tail"]
    steps = int(round((math.log(TAIL_GRID_HIGH) - math.log(TAIL_GRID_LOW)) / TAIL_GRID_STEP))
    half = TAIL_GRID_STEP / 2.0
    fine = math.log(TAIL_GRID_LOW) + half * np.arange(2 * steps + 1)
    # integrand of int du/Psi in y = log u
    f_fine = np.array([math.exp(y) / psi(m, math.exp(y)) for y in fine])
    ys = fine[::2]
    head = integrate.cumulative_simpson(f_fine, dx=half, initial=0.0)[::2]
    top = math.exp(ys[-1])
    exponent = (math.log(psi(m, top)) - math.log(psi(m, math.exp(ys[-2])))) / TAIL_GRID_STEP
    if exponent <= 1.0 + 1e-3:
        raise NumericalError(
            "Psi does not grow fast enough to extrapolate the tail of int du/Psi",
            diagnostics={"exponent": exponent, "u": top},
        )
    tail = top / ((exponent - 1.0) * psi(m, top))
    values = head[-1] - head + tail
    table = _TailTable(nodes=np.exp(ys), values=values)
    m._cache["tail"] = table
    logger.debug("Tabulated int du/Psi for %s on %d nodes", m.label, len(ys))
    return table


def psi_tail(m: LambdaMeasure, v: float) -> float:
    """G(v) = int_v^inf du / Psi(u)"""
    if v <= 0.0:
        raise MeasureError(f"G is defined for v > 0, got {v}")
    if m.is_kingman_only:
        return 2.0 / (m.kingman_mass * v)
    table = _tail_table(m)
    if v < table.nodes[0] or v > table.nodes[-1]:
        raise NumericalError(f"v={v} lies outside the tabulated range", diagnostics={"v": v})
    k = min(int(np.searchsorted(table.nodes, v, side="right")), len(table.nodes) - 1)
    upper = float(table.nodes[k])
    return float(table.values[k]) + _quad(lambda u: 1.0 / psi(m, u), v, upper)


def cdi_speed(m: LambdaMeasure, t: float) -> float:
    """v(t), the unique solution of int_{v(t)}^inf du / Psi(u) = t"""
    if classify(m).regime != Regime.CDI:
        raise DomainError(f"cdi_speed needs a CDI measure, {m.label} is not")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if m.is_kingman_only:
        return 2.0 / (m.kingman_mass * t)
    table = _tail_table(m)
    values = table.values
    if t > values[0] or t < values[-1]:
        raise NumericalError(f"t={t} lies outside the tabulated range of G", diagnostics={"t": t})
    # values decrease along the grid; find the cell with G(u_k) >= t >= G(u_k+1)
    k = int(np.searchsorted(-values, -t, side="left"))
    # one spare cell on each side absorbs the Simpson/quadrature mismatch at nodes
    lo = float(table.nodes[max(k - 2, 0)])
    hi = float(table.nodes[min(k + 1, len(values) - 1)])
    return optimize.brentq(lambda v: psi_tail(m, v) - t, lo, hi, xtol=1e-300, rtol=1e-12)


def nu_mass_above(m: LambdaMeasure, epsilon: float) -> float:
    """nu([epsilon, 1)), the rate of reproduction events of size at least epsilon"""
    if m.kingman_mass > 0.0:
        raise DomainError("nu has infinite mass near 0 when Lambda({0}) > 0")
    total = math.fsum(w / (x * x) for x, w in m.atoms if x >= epsilon)
    if m.density is None:
        return total
    if epsilon > 0.0:
        return total + m.density.integrate(lambda u: u ** -2, epsilon, 1.0)
    report = classify(m).integral_report["nu_mass"]
    if report.divergent is not False or report.value is None:
        raise DomainError(f"nu has infinite mass for {m.label}; a truncation epsilon > 0 is required")
    return report.value


def dropped_mass(m: LambdaMeasure, epsilon: float) -> float:
    """int_0^epsilon u nu(du), the mass ignored by an epsilon truncation (inf when divergent)"""
    if epsilon <= 0.0:
        return 0.0
    total = math.fsum(w / x for x, w in m.atoms if x < epsilon)
    density = m.density
    if density is None:
        return total
    if density.beta_params is not None:
        a, b = density.beta_params
        if a <= 1.0:
            return math.inf
        scale = math.exp(special.betaln(a - 1.0, b) - special.betaln(a, b))
        return total + scale * float(special.betainc(a - 1.0, b, epsilon))
    if density.smooth(0.0) > 0.0:
        return math.inf
    return total + density.integrate(lambda u: 1.0 / u, 0.0, epsilon)
