"""Named test problems used by the harness, the CLI examples and the test suite."""

from __future__ import annotations

from .core import CoefficientFn, GeneratorFn, GParams, ProblemSpec

ZERO = CoefficientFn.constant(0.0)


def american_put(strike: float = 1.0, T: float = 1.0, sigma: float = 0.2,
                 sigma_lo: float | None = None, rate: float = 0.0) -> ProblemSpec:
    """Put on a geometric state dX = r X dt + X dB with <B> in [sigma_lo^2, sigma^2].

    A positive rate enters as drift r x and discounting generator f = -r y.
    """
    lo = sigma if sigma_lo is None else sigma_lo
    gp = GParams(lo * lo, sigma * sigma)
    put = CoefficientFn.put(strike)
    f = GeneratorFn.linear(y=[-rate]) if rate else GeneratorFn.zero()
    return ProblemSpec(
        k=1, g_params=gp,
        b=CoefficientFn.geometric(rate) if rate else ZERO, h=ZERO,
        sigma=CoefficientFn.geometric(1.0),
        f=[f], g=[GeneratorFn.zero()], l=[put], l_tilde=[CoefficientFn.constant(strike)],
        phi=[put], T=T, L=max(1.0, rate),
        name=f"american_put(K={strike:g},T={T:g},r={rate:g})",
    )


def european(kind: str = "call", strike: float = 1.0, T: float = 1.0, sigma_lo: float = 0.1,
             sigma_hi: float = 0.2) -> ProblemSpec:
    """Convex payoff with an inactive obstacle (the unreflected system)."""
    pay = CoefficientFn.call(strike) if kind == "call" else CoefficientFn.put(strike)
    low = CoefficientFn.constant(-1e6)
    return ProblemSpec(
        k=1, g_params=GParams(sigma_lo ** 2, sigma_hi ** 2), b=ZERO, h=ZERO,
        sigma=CoefficientFn.geometric(1.0), f=[GeneratorFn.zero()], g=[GeneratorFn.zero()],
        l=[low], l_tilde=[low], phi=[pay], T=T, L=1.0,
        name=f"european_{kind}(K={strike:g},T={T:g})",
    )


def g_heat(terminal: CoefficientFn, gp: GParams, T: float = 1.0) -> ProblemSpec:
    """b = h = 0, sigma = 1, no generators, inactive obstacle: F reduces to G."""
    low = CoefficientFn.constant(-1e6)
    return ProblemSpec(
        k=1, g_params=gp, b=ZERO, h=ZERO, sigma=CoefficientFn.constant(1.0),
        f=[GeneratorFn.zero()], g=[GeneratorFn.zero()], l=[low], l_tilde=[low],
        phi=[terminal], T=T, L=max(1.0, terminal.lipschitz(-50, 50)), name="g_heat",
    )


def constant_problem(c: float = 1.0, k: int = 1, T: float = 1.0,
                     gp: GParams | None = None) -> ProblemSpec:
    """u = l = phi = c with no generators."""
    gp = gp or GParams(0.01, 0.04)
    cst = CoefficientFn.constant(c)
    return ProblemSpec(
        k=k, g_params=gp, b=ZERO, h=ZERO, sigma=CoefficientFn.geometric(1.0),
        f=[GeneratorFn.zero()] * k, g=[GeneratorFn.zero()] * k, l=[cst] * k,
        l_tilde=[cst] * k, phi=[cst] * k, T=T, L=1.0, name=f"constant({c:g})",
    )


def coupled_arctan(strike: float = 1.0, T: float = 1.0, sigma: float = 0.2,
                   sigma_lo: float | None = None, scale: float = 1.0) -> ProblemSpec:
    """k = 2 with f^1 = scale arctan(y^2), f^2 = scale arctan(y^1) and a common put obstacle."""
    lo = sigma if sigma_lo is None else sigma_lo
    put = CoefficientFn.put(strike)
    f1 = GeneratorFn.arctan(1, 1, scale)
    f2 = GeneratorFn.arctan(0, 1, scale)
    return ProblemSpec(
        k=2, g_params=GParams(lo * lo, sigma * sigma),
        b=ZERO, h=ZERO, sigma=CoefficientFn.geometric(1.0),
        f=[f1, f2], g=[GeneratorFn.zero()] * 2, l=[put, put],
        l_tilde=[CoefficientFn.constant(strike)] * 2, phi=[put, put], T=T,
        L=max(1.0, abs(scale)), name=f"coupled_arctan(scale={scale:g})",
    )


def swapped(spec: ProblemSpec) -> ProblemSpec:
    """Relabel the two components of a k = 2 problem."""
    if spec.k != 2:
        raise ValueError("component swap is defined for k = 2")

    def swap_gen(gen: GeneratorFn) -> GeneratorFn:
        if gen.kind == "arctan":
            j = 1 - int(gen.params[0])
            return GeneratorFn("arctan", (j,) + gen.params[1:])
        if gen.kind == "linear" and len(gen.params) == 5:
            p = gen.params
            return GeneratorFn("linear", p[:3] + (p[4], p[3]))
        return gen

    return spec.replace(
        f=[swap_gen(spec.f[1]), swap_gen(spec.f[0])],
        g=[swap_gen(spec.g[1]), swap_gen(spec.g[0])],
        l=[spec.l[1], spec.l[0]], l_tilde=[spec.l_tilde[1], spec.l_tilde[0]],
        phi=[spec.phi[1], spec.phi[0]], name=spec.name + "_swapped",
    )


def coupled_linear(rate: float = 0.05, cross: float = 0.02, strike: float = 1.0,
                   T: float = 1.0, sigma: float = 0.2, sigma_lo: float | None = None) -> ProblemSpec:
    """k = 2 discounted puts with f^i = -rate y^i + cross y^j (monotone coupling, active obstacle)."""
    lo = sigma if sigma_lo is None else sigma_lo
    put = CoefficientFn.put(strike)
    return ProblemSpec(
        k=2, g_params=GParams(lo * lo, sigma * sigma),
        b=CoefficientFn.geometric(rate), h=ZERO, sigma=CoefficientFn.geometric(1.0),
        f=[GeneratorFn.linear(y=[-rate, cross]), GeneratorFn.linear(y=[cross, -rate])],
        g=[GeneratorFn.zero()] * 2, l=[put, put], l_tilde=[CoefficientFn.constant(strike)] * 2,
        phi=[put, put], T=T, L=1.0, name=f"coupled_linear(r={rate:g},c={cross:g})",
    )


def comparison_corpus(shift: float = 0.1) -> list:
    """Declared-ordered pairs (name, upper problem, lower problem).

    * terminal shift: discounted put with obstacle put - 2 shift; the lower
      problem lowers only the terminal by ``shift``
    * obstacle shift: the lower problem lowers only the obstacle
    * generator shift: the lower problem lowers the generator by ``shift``
    * monotone coupling: k = 2 linear coupling with non-negative cross term,
      lower problem shifts terminal and obstacle of both components
    """
    base = american_put(rate=0.05)
    low_obst = [fn.shifted(-2 * shift) for fn in base.l]
    term_hi = base.replace(l=low_obst, name="terminal_shift")
    term_lo = term_hi.replace(phi=[fn.shifted(-shift) for fn in base.phi],
                              name="terminal_shift_lo")
    obst_lo = base.replace(l=[fn.shifted(-shift) for fn in base.l], name="obstacle_shift_lo")
    gen_lo = base.replace(f=[gen.shifted(-shift) for gen in base.f], name="generator_shift_lo")
    cpl = coupled_linear()
    cpl_lo = cpl.replace(phi=[fn.shifted(-shift) for fn in cpl.phi],
                         l=[fn.shifted(-shift) for fn in cpl.l], name="coupling_lo")
    return [
        ("terminal shift", term_hi, term_lo),
        ("obstacle shift", base, obst_lo),
        ("generator shift", base, gen_lo),
        ("k=2 monotone coupling", cpl, cpl_lo),
    ]
