"""Command-line front end.

Exit codes: 0 success (and every checked property holds), 1 a checked
property fails, 2 invalid input, 3 numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .darboux import check_repulsivity, run_cascade
from .errors import InvalidInputError, KinklabError
from .grid import FULL, ODD, Grid
from .kink import compute_kink, decay_rate_fit
from .model import from_even_coeffs, make_phi_family, validate
from .operator import eigen_decompose, linearized_operator
from .phi8 import figure1_data
from .profile import build_refined_profile, compute_rmin_sources, fgr_coefficient
from .resonance import check_genericity, enumerate_sets, format_sets
from .scattering import compute_jost

__all__ = ["RunConfig", "CsvArtifact", "parse_config", "write_csv", "read_csv", "emit_svg",
           "run", "main", "COMMANDS"]

COMMANDS = ("kink", "spectrum", "darboux", "check-repulsivity", "resonances", "fgr",
            "phi8-figure", "certify", "scattering")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Flat run configuration; field names map to dotted keys (``grid_L`` is ``grid.L``).

    ``model.coeffs`` (comma list of the ``u^0, u^2, u^4, ...`` coefficients)
    overrides ``model.eps``, which selects the product family.
    """

    model_eps: float = 0.0
    model_coeffs: str = ""
    model_zeta: str = ""
    grid_L: float = 30.0
    grid_n: int = 6001
    eps: str = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    tol: str = ""
    activity: float = 1e-3
    fgr_threshold: float = 1e-8
    fgr_convention: str = "sqrt"
    profile_order: str = ""
    scattering_k: str = "0.001,0.5,1,2,4"
    svg: bool = True
    out: str = "."

    @staticmethod
    def key(name: str) -> str:
        return name.replace("_", ".", 1) if name.split("_")[0] in ("model", "grid", "fgr", "profile",
                                                                    "scattering") else name

    def items(self) -> list[tuple[str, str]]:
        return [(self.key(f.name), _fmt_value(getattr(self, f.name))) for f in fields(self)]

    def eps_list(self) -> list[float]:
        return _float_list(self.eps, "eps")

    def k_list(self) -> list[float]:
        return _float_list(self.scattering_k, "scattering.k")

    def tol_value(self) -> float | None:
        return float(self.tol) if self.tol.strip() else None

    def grid(self) -> Grid:
        return Grid(self.grid_L, self.grid_n)

    def model(self):
        if self.model_coeffs.strip():
            zeta = float(self.model_zeta) if self.model_zeta.strip() else None
            return from_even_coeffs(_float_list(self.model_coeffs, "model.coeffs"), zeta, label="poly")
        return make_phi_family(self.model_eps)


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _float_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"{name}: expected a comma-separated list of numbers") from exc
    if not vals:
        raise InvalidInputError(f"{name}: empty list")
    return vals


def _convert(f, raw: str):
    t = f.type if isinstance(f.type, str) else f.type.__name__
    try:
        if t == "bool":
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if t == "float":
            return float(raw)
        if t == "int":
            return int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"{RunConfig.key(f.name)}: cannot parse {raw!r} as {t}") from exc
    return raw.strip()


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Raises
    ------
    InvalidInputError
        On malformed lines or unknown keys.
    """
    cfg = base or RunConfig()
    by_key = {RunConfig.key(f.name): f for f in fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"config line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in by_key:
            raise InvalidInputError(f"config line {lineno}: unknown key {key!r}")
        f = by_key[key]
        setattr(cfg, f.name, _convert(f, value))
    return cfg


@dataclass
class CsvArtifact:
    """Comment header, column names and numeric rows."""

    header: list
    columns: list
    rows: np.ndarray


def _header(command: str, cfg: RunConfig, provenance: list[str]) -> list[str]:
    lines = [f"kinklab {__version__}", f"command = {command}"]
    lines += [f"config {k} = {v}" for k, v in cfg.items()]
    lines += [f"provenance {p}" for p in provenance]
    return lines


def write_csv(path: Path, artifact: CsvArtifact) -> None:
    """Write with ``%.17g`` formatting so that re-parsing is exact."""
    rows = np.atleast_2d(np.asarray(artifact.rows, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for h in artifact.header:
            fh.write(f"# {h}\n")
        fh.write(",".join(artifact.columns) + "\n")
        for r in rows:
            fh.write(",".join(f"{v:.17g}" for v in r) + "\n")


def read_csv(path: Path) -> CsvArtifact:
    header, columns, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                header.append(line[2:] if line.startswith("# ") else line[1:])
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    return CsvArtifact(header, columns or [], np.array(rows))


def emit_svg(curves: dict, path: Path, xlabel: str = "x", ylabel: str = "value") -> None:
    """Deterministic line plot of ``label -> (x, y)``."""
    if not curves:
        raise InvalidInputError("no curves to plot")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "kinklab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, (x, y) in curves.items():
            ax.plot(x, y, label=str(label), lw=1.2)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _say(msg: str) -> None:
    print(msg, flush=True)


def _setup(cfg: RunConfig):
    model = cfg.model()
    report = validate(model)
    if not report.ok:
        raise InvalidInputError("model failed validation: " + ", ".join(report.failed()))
    grid = cfg.grid()
    return model, grid, compute_kink(model, grid)


def _cmd_kink(cfg: RunConfig) -> int:
    model, grid, kink = _setup(cfg)
    rate = decay_rate_fit(kink)
    _say(f"model = {model.label}\nzeta = {model.zeta:.17g}\nomega = {model.omega:.17g}\n"
         f"fitted decay rate = {rate:.17g}")
    write_csv(_out(cfg) / "kink.csv", CsvArtifact(
        _header("kink", cfg, [f"model {model.label}", f"omega {model.omega:.17g}"]),
        ["x", "H", "Hprime"], np.column_stack([grid.x, kink.H.values, kink.Hprime.values])))
    return EXIT_OK


def _cmd_spectrum(cfg: RunConfig) -> int:
    model, grid, kink = _setup(cfg)
    rows = []
    for code, sector in ((0, FULL), (1, ODD)):
        spec = eigen_decompose(linearized_operator(kink, sector))
        for i, (ev, dv) in enumerate(zip(spec.eigenvalues, spec.discrete_eigenvalues)):
            rows.append([code, i, ev, dv])
            _say(f"{sector:9s} {i}  {ev:.12f}  (grid {dv:.12f})")
        for w in spec.warnings:
            print(f"warning: {w}", file=sys.stderr)
    write_csv(_out(cfg) / "spectrum.csv", CsvArtifact(
        _header("spectrum", cfg, ["sector 0 = full_line, 1 = odd", f"omega2 {model.omega2:.17g}"]),
        ["sector", "index", "eigenvalue", "grid_eigenvalue"], np.array(rows).reshape(-1, 4)))
    return EXIT_OK


def _cascade(cfg: RunConfig):
    model, grid, kink = _setup(cfg)
    return model, grid, kink, run_cascade(kink)


def _cmd_darboux(cfg: RunConfig) -> int:
    model, grid, kink, casc = _cascade(cfg)
    cols = [f"V{k + 1}" for k in range(len(casc.potentials))]
    data = np.column_stack([grid.x] + [np.real(V.values) for V in casc.potentials])
    _say(f"stages = {casc.N_tilde}")
    for k, s in enumerate(casc.stages, start=1):
        _say(f"stage {k}: removed eigenvalue {s.lambda_tilde_sq:.12f}")
    write_csv(_out(cfg) / "darboux.csv", CsvArtifact(
        _header("darboux", cfg, [f"stages {casc.N_tilde}", f"omega2 {model.omega2:.17g}"]),
        ["x"] + cols, data))
    return EXIT_OK


def _cmd_repulsivity(cfg: RunConfig) -> int:
    model, grid, kink, casc = _cascade(cfg)
    rep = check_repulsivity(casc.V_D, tol=cfg.tol_value(), activity=cfg.activity)
    _say(f"stages = {casc.N_tilde}\nmax x V_D' = {rep.max_xVp:.6e} at x = {rep.argmax_x:.4f}\n"
         f"min x V_D' = {rep.min_xVp:.6e} at x = {rep.argmin_x:.4f}\nverdict = {rep.verdict}")
    return EXIT_OK if rep.repulsive else EXIT_FAIL


def _structure(cfg: RunConfig):
    model, grid, kink = _setup(cfg)
    spec = eigen_decompose(linearized_operator(kink, ODD))
    lams = spec.lambdas[np.isfinite(spec.lambdas)]
    if lams.size == 0:
        raise InvalidInputError("the linearization has no internal mode; nothing to classify")
    return model, grid, kink, spec, enumerate_sets(lams, model.omega)


def _cmd_resonances(cfg: RunConfig) -> int:
    *_, st = _structure(cfg)
    gen = check_genericity(st)
    _say(format_sets(st))
    _say("genericity = " + ("pass" if gen.passed else "fail"))
    for m in gen.resonant_frequency:
        _say(f"  |lambda.m| = omega at {m}")
    for m in gen.unbalanced_zero:
        _say(f"  unbalanced zero frequency at {m}")
    for m, d in gen.near_resonances:
        print(f"warning: near resonance at {m} (offset {d:.3e})", file=sys.stderr)
    return EXIT_OK if gen.passed else EXIT_FAIL


def _fgr(cfg: RunConfig, model, kink, spec, st):
    order = int(cfg.profile_order) if cfg.profile_order.strip() else None
    prof = build_refined_profile(model, kink, spec, st, order=order)
    src = compute_rmin_sources(prof)
    lams = np.array(st.lambdas)
    rs = [float(np.sqrt(m.dot(lams) ** 2 - model.omega2)) for m in src]
    ks = sorted({np.sqrt(r) if cfg.fgr_convention == "sqrt" else r for r in rs})
    jost = compute_jost(linearized_operator(kink).V, model.omega2, ks)
    return fgr_coefficient(src, prof, jost, threshold=cfg.fgr_threshold, convention=cfg.fgr_convention)


def _cmd_fgr(cfg: RunConfig) -> int:
    model, grid, kink, spec, st = _structure(cfg)
    if not check_genericity(st).passed:
        _say("genericity fails; FGR coefficients are undefined")
        return EXIT_FAIL
    rep = _fgr(cfg, model, kink, spec, st)
    rows = []
    for e in rep.entries:
        verdict = "nondegenerate" if e.nondegenerate else "degenerate"
        _say(f"m = {e.m}  r = {e.r:.12g}  k = {e.k:.12g}  gamma = {e.gamma:.10e}  "
             f"(projected {e.gamma_projected:.10e})  {verdict}")
        rows.append([e.m.order, e.r, e.k, e.gamma, e.gamma_projected, float(e.nondegenerate)])
    write_csv(_out(cfg) / "fgr.csv", CsvArtifact(
        _header("fgr", cfg, ["indices " + " ".join(str(e.m) for e in rep.entries)]),
        ["order", "r", "k", "gamma", "gamma_projected", "nondegenerate"], np.array(rows).reshape(-1, 6)))
    return EXIT_OK if rep.nondegenerate else EXIT_FAIL


def _cmd_phi8_figure(cfg: RunConfig) -> int:
    eps = cfg.eps_list()
    data = figure1_data(eps, cfg.grid())
    out = _out(cfg)
    curves = {}
    for e in eps:
        c = data[e]
        x, y = c.curve.x, np.real(c.curve.values)
        curves[f"eps = {e:g}"] = (x, y)
        label = "V3" if c.stages == 2 else f"V{c.stages + 1}"
        _say(f"eps = {e:g}: stages = {c.stages}, curve = {label} - omega^2, peak = {np.max(y):.6e}")
        write_csv(out / f"phi8_eps={e:g}.csv", CsvArtifact(
            _header("phi8-figure", cfg, [f"eps {e:.17g}", f"stages {c.stages}",
                                         f"eigenvalues " + " ".join(f"{v:.17g}" for v in c.eigenvalues)]),
            ["x", "value"], np.column_stack([x, y])))
    if cfg.svg:
        emit_svg(curves, out / "phi8_figure.svg", ylabel="V_D - (2 - 4 eps^2 + 2 eps^4)")
    return EXIT_OK


def _cmd_certify(cfg: RunConfig) -> int:
    model, grid, kink, spec, st = _structure(cfg)
    casc = run_cascade(kink)
    rep = check_repulsivity(casc.V_D, tol=cfg.tol_value(), activity=cfg.activity)
    a1 = rep.repulsive
    gen = check_genericity(st)
    a2 = gen.passed
    a3 = False
    detail3 = "skipped (genericity fails)"
    if a2:
        fgr = _fgr(cfg, model, kink, spec, st)
        a3 = fgr.nondegenerate
        detail3 = ", ".join(f"gamma{e.m} = {e.gamma:.6e}" for e in fgr.entries)
    lines = [
        ("1", "repulsivity", a1, f"{rep.verdict}; stages = {casc.N_tilde}; max x V_D' = {rep.max_xVp:.3e}; "
                                 f"min x V_D' = {rep.min_xVp:.3e}"),
        ("2", "genericity", a2, f"M = {st.M}; R_min = {{{', '.join(str(m) for m in st.R_min)}}}"),
        ("3", "fermi golden rule", a3, detail3),
    ]
    for num, name, ok, detail in lines:
        _say(f"assumption {num} ({name}): {'PASS' if ok else 'FAIL'}  [{detail}]")
    write_csv(_out(cfg) / "certify.csv", CsvArtifact(
        _header("certify", cfg, [f"model {model.label}"] + [f"assumption {n} {d}" for n, _, _, d in lines]),
        ["assumption", "pass"], np.array([[int(n), float(ok)] for n, _, ok, _ in lines])))
    return EXIT_OK if (a1 and a2 and a3) else EXIT_FAIL


def _cmd_scattering(cfg: RunConfig) -> int:
    model, grid, kink = _setup(cfg)
    ks = cfg.k_list()
    jost = compute_jost(linearized_operator(kink).V, model.omega2, ks, substeps=2)
    rows = []
    for i, k in enumerate(jost.k_grid):
        T, R = jost.T[i], jost.R[i]
        rows.append([k, T.real, T.imag, R.real, R.imag, abs(T) ** 2 + abs(R) ** 2 - 1.0,
                     jost.wronskian_variation[i]])
        _say(f"k = {k:.6g}  |T| = {abs(T):.12f}  |R| = {abs(R):.3e}  "
             f"unitarity defect = {rows[-1][5]:.2e}")
    if jost.wronskian0 is not None:
        _say(f"W(k -> 0) = {abs(jost.wronskian0):.6e}")
    write_csv(_out(cfg) / "scattering.csv", CsvArtifact(
        _header("scattering", cfg, ["potential L_1"]),
        ["k", "ReT", "ImT", "ReR", "ImR", "unitarity_defect", "wronskian_variation"], np.array(rows)))
    return EXIT_OK


_HANDLERS = {
    "kink": _cmd_kink,
    "spectrum": _cmd_spectrum,
    "darboux": _cmd_darboux,
    "check-repulsivity": _cmd_repulsivity,
    "resonances": _cmd_resonances,
    "fgr": _cmd_fgr,
    "phi8-figure": _cmd_phi8_figure,
    "certify": _cmd_certify,
    "scattering": _cmd_scattering,
}


def run(command: str, cfg: RunConfig) -> int:
    """Execute ``command`` and map library errors onto exit codes."""
    if command not in _HANDLERS:
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return _HANDLERS[command](cfg)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KinklabError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kinklab", description="Kink spectra, Darboux cascades and FGR checks.")
    p.add_argument("--version", action="version", version=f"kinklab {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat 'key = value' configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--eps", help="model eps, or the comma list of eps for phi8-figure")
    p.add_argument("--grid-L", type=float, dest="grid_L")
    p.add_argument("--grid-n", type=int, dest="grid_n")
    p.add_argument("--tol", type=float, help="repulsivity tolerance for x V_D'")
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InvalidInputError(f"cannot read config: {exc}") from exc
        cfg = parse_config(text, cfg)
    if args.out is not None:
        cfg.out = args.out
    if args.grid_L is not None:
        cfg.grid_L = args.grid_L
    if args.grid_n is not None:
        cfg.grid_n = args.grid_n
    if args.tol is not None:
        cfg.tol = repr(args.tol)
    if args.eps is not None:
        vals = _float_list(args.eps, "--eps")
        if args.command == "phi8-figure":
            cfg.eps = args.eps
        elif len(vals) != 1:
            raise InvalidInputError("--eps takes a single value for this command")
        else:
            cfg.model_eps = vals[0]
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
