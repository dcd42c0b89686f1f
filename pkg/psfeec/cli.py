"""Cli access point for psfeec.

Every subcommand builds a :class:`~psfeec.api.report.Report`, writes it when
``--out`` is given and prints a short summary otherwise. Exit code 0 means
every verdict passed, 1 that some verdict failed and 2 a usage error.
"""
import logging
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional, Tuple

import click
import numpy as np

from psfeec.api.assembly import (
    GLOBAL_FAMILIES,
    assemble_global,
    global_dimension_formula,
    verify_global_exactness,
)
from psfeec.api.config import Config
from psfeec.api.dofs import build_dofs, edge_unisolvence, min_degree, unisolvence_report
from psfeec.api.exactness import (
    commuting_residuals,
    div_preimage_algebraic,
    div_preimage_constructive,
    idempotency_defect,
    verify_sequence,
)
from psfeec.api.fields import random_scalar, random_vector
from psfeec.api.mesh import (
    MacroMesh,
    annulus,
    pentagon,
    perturbed_square,
    powell_sabin_refine,
    random_triangle,
    read_mesh,
    reference_triangle,
    unit_square,
    validate_complex,
)
from psfeec.api.poly import divergence
from psfeec.api.report import Report
from psfeec.api.spaces import build_space, dimension_formula
from psfeec.api.stokes import convergence_study
from psfeec.enums import (
    Backend,
    Chain,
    Diagram,
    EdgeVariant,
    Family,
    GlobalSequence,
    InteriorRule,
    LocalSequence,
)
from psfeec.exceptions import Bug, ClientError, Notification
from psfeec.utils import format_float, parallel_map, parse_degree_range, setup_logging

logger = logging.getLogger(__name__)

_BUILTIN_MESHES = {
    "square": unit_square,
    "triangle": reference_triangle,
    "annulus": annulus,
    "pentagon": pentagon,
    "perturbed": perturbed_square,
}

_DOF_FAMILIES = ("S0", "L1", "V2", "S1", "L2")


def _degrees(ctx: click.Context, param: click.Parameter, value: str) -> Tuple[int, ...]:
    try:
        return parse_degree_range(value)
    except ValueError:
        raise click.BadParameter("expected N, A..B or a comma separated list, got %s" % value)


def _load_mesh(path: Optional[str], builtin: str) -> MacroMesh:
    if path:
        return read_mesh(path)
    return _BUILTIN_MESHES[builtin]()


def _finish(report: Report, out: Optional[str]) -> None:
    if out:
        report.write(Path(out))
    else:
        for row in report.rows:
            click.echo(" ".join("%s=%s" % (k, _text(v)) for k, v in row.items()))
    if not report.passed:
        raise Notification("%s: %s" % (report.command, "; ".join(report.failures)))


def _text(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def _checked(func: Callable) -> Callable:
    """Map library exceptions to exit codes."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ClientError as e:
            raise click.UsageError(str(e))
        except Notification as e:
            click.echo(str(e), err=True)
            raise click.exceptions.Exit(1)
        except (click.ClickException, click.exceptions.Exit, Bug):
            raise
        except Exception as e:
            raise Bug(str(e))

    return wrapper


mesh_option = click.option(
    "--mesh", "mesh_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Coarse mesh file."
)
builtin_option = click.option(
    "--builtin",
    type=click.Choice(sorted(_BUILTIN_MESHES)),
    default="square",
    show_default=True,
    help="Builtin mesh used when no mesh file is given.",
)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report file, .csv or .json.")


@click.group()
@click.help_option("-h", "--help")
@click.option("--threads", type=int, default=None, help="Worker threads.")
@click.option("--seed", type=int, default=None, help="Seed of the random inputs.")
@click.option("--tol-rank", type=float, default=None, envvar="PSFEEC_TOL_RANK", help="Rank decision tolerance.")
@click.option(
    "--tol-residual", type=float, default=None, envvar="PSFEEC_TOL_RESIDUAL", help="Residual tolerance."
)
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
@click.version_option(package_name="psfeec")
@_checked
def main(
    threads: Optional[int],
    seed: Optional[int],
    tol_rank: Optional[float],
    tol_residual: Optional[float],
    verbose: int,
) -> None:
    """Powell–Sabin finite element spaces, their sequences and Stokes pairs.

    Raises:
        ClientError: When exception is caused due to client configuration.
        Bug: When exception is caused by unknown issue.
    """
    config = Config.load_config()
    if threads is not None:
        config.run.threads = max(threads, 1)
    if seed is not None:
        config.run.seed = seed
    if tol_rank is not None:
        config.tolerance.rank = tol_rank
    if tol_residual is not None:
        config.tolerance.residual = tol_residual
    level = {0: config.logging.level, 1: "INFO"}.get(verbose, "DEBUG")
    setup_logging(level, config.logging.fmt)


@main.command()
@mesh_option
@builtin_option
@click.option(
    "--rule",
    type=click.Choice([rule.value for rule in InteriorRule]),
    default=InteriorRule.incenter.value,
    show_default=True,
)
@out_option
@_checked
def refine(mesh_path: Optional[str], builtin: str, rule: str, out: Optional[str]) -> None:
    """Powell–Sabin refinement of a mesh as JSON."""
    sc = powell_sabin_refine(_load_mesh(mesh_path, builtin), InteriorRule(rule))
    validate_complex(sc)
    report = Report("refine")
    report.set_meta("complex", sc.to_dict())
    report.add_row(dict(sc.to_dict()["counts"]))
    _finish(report, out)


@main.command()
@click.option("--r-max", type=int, default=6, show_default=True)
@out_option
@_checked
def dims(r_max: int, out: Optional[str]) -> None:
    """Local dimensions against their closed forms."""
    split = powell_sabin_refine(reference_triangle())[0]
    report = Report("dims")
    tasks = [
        (family, ring, r)
        for family in Family
        for ring in (False, True)
        for r in range(r_max + 1)
        if dimension_formula(family, ring, r) is not None
    ]

    def compute(task):
        family, ring, r = task
        return build_space(split, family, ring, r).dim

    for (family, ring, r), computed in zip(tasks, parallel_map(compute, tasks)):
        formula = dimension_formula(family, ring, r)
        report.add_row(
            {
                "family": family.value,
                "ring": ring,
                "r": r,
                "formula": formula,
                "computed": computed,
                "match": formula == computed,
            }
        )
        if formula != computed:
            report.fail("%s ring=%s r=%s: %s != %s" % (family.value, ring, r, computed, formula))
    _finish(report, out)


@main.command()
@click.option(
    "--family",
    type=click.Choice(_DOF_FAMILIES + tuple(v.value for v in EdgeVariant)),
    required=True,
)
@click.option("--r", "degrees", default="2", callback=_degrees, help="Degree or range.")
@click.option("--trials", type=int, default=20, show_default=True)
@out_option
@_checked
def unisolvence(family: str, degrees: Tuple[int, ...], trials: int, out: Optional[str]) -> None:
    """Singular values of DOF matrices on random triangles."""
    config = Config.current()
    rng = np.random.default_rng(config.run.seed)
    report = Report("unisolvence")
    for r in degrees:
        if family in (v.value for v in EdgeVariant):
            results = [(0, edge_unisolvence(r, EdgeVariant(family)))]
        else:
            target = Family(family)
            if r < min_degree(target):
                raise ClientError("%s needs r >= %s" % (family, min_degree(target)))
            meshes = [reference_triangle()] + [random_triangle(rng) for _ in range(trials)]

            def check(mesh: MacroMesh):
                dofs = build_dofs(powell_sabin_refine(mesh)[0], target, r)
                return unisolvence_report(dofs.space, dofs)

            results = list(enumerate(parallel_map(check, meshes)))
        for trial, result in results:
            report.add_row(
                {
                    "family": family,
                    "r": r,
                    "trial": trial,
                    "size": result.size,
                    "dim": result.dim,
                    "min_singular": result.min_singular,
                    "condition": result.condition,
                    "passed": result.passed,
                }
            )
            if not result.passed:
                report.fail("%s r=%s trial %s is not unisolvent" % (family, r, trial))
    _finish(report, out)


@main.command()
@click.option("--which", type=click.Choice([t.value for t in Diagram]), default="thm1", show_default=True)
@click.option("--r", "degrees", default="3", callback=_degrees, help="Degree or range.")
@click.option("--trials", type=int, default=50, show_default=True)
@out_option
@_checked
def commute(which: str, degrees: Tuple[int, ...], trials: int, out: Optional[str]) -> None:
    """Commuting diagram residuals for random smooth inputs."""
    config = Config.current()
    diagram = Diagram(which)
    middle = Chain.Pi1 if diagram == Diagram.lagrange else Chain.varpi1
    split = powell_sabin_refine(reference_triangle())[0]
    rng = np.random.default_rng(config.run.seed)
    report = Report("commute")
    report.set_meta("tolerance", config.tolerance.commute)
    for r in degrees:
        inputs = [(random_scalar(rng), random_vector(rng)) for _ in range(trials)]

        def check(pair):
            scalar, vector = pair
            residual = commuting_residuals(split, diagram, r, scalar, vector)
            return residual, idempotency_defect(middle, vector, split, r)

        for trial, (residual, idempotent) in enumerate(parallel_map(check, inputs)):
            worst = max(residual.rot, residual.div)
            report.add_row(
                {
                    "diagram": which,
                    "r": r,
                    "trial": trial,
                    "rot": residual.rot,
                    "div": residual.div,
                    "max_residual": worst,
                    "idempotent": idempotent,
                }
            )
            if worst > config.tolerance.commute:
                report.fail("%s r=%s trial %s residual %.3e" % (which, r, trial, worst))
            if idempotent > config.tolerance.idempotent:
                report.fail("%s r=%s trial %s idempotency %.3e" % (middle.value, r, trial, idempotent))
    _finish(report, out)


@main.command()
@click.option("--r", "degrees", default="3", callback=_degrees, help="Degree or range.")
@click.option(
    "--chains",
    default="all",
    show_default=True,
    help="Comma separated sequence names or 'all'.",
)
@out_option
@_checked
def exactness(degrees: Tuple[int, ...], chains: str, out: Optional[str]) -> None:
    """Rank checks of the local sequences on the reference split."""
    if chains == "all":
        sequences = list(LocalSequence)
    else:
        names = {s.name: s for s in LocalSequence}
        try:
            sequences = [names[name.strip()] for name in chains.split(",")]
        except KeyError as e:
            raise ClientError("unknown sequence %s, expected one of %s" % (e, ", ".join(names)))
    split = powell_sabin_refine(reference_triangle())[0]
    report = Report("exactness")
    tasks = [(s, r) for s in sequences for r in degrees]
    for (sequence, r), check in zip(tasks, parallel_map(lambda t: verify_sequence(split, *t), tasks)):
        control = sequence == LocalSequence.ring_slv_v2
        report.add_row(
            {
                "sequence": sequence.name,
                "r": r,
                "dims": list(check.dims),
                "rot_rank": check.rot_rank,
                "div_rank": check.div_rank,
                "rot_kernel": check.rot_kernel,
                "deficit": check.deficit,
                "composition": check.composition,
                "exact": check.exact,
            }
        )
        if control and check.deficit != 3:
            report.fail("%s r=%s: deficit %s instead of 3" % (sequence.name, r, check.deficit))
        elif not control and not check.exact:
            report.fail("%s r=%s is not exact" % (sequence.name, r))
    _finish(report, out)


@main.command()
@click.option("--r", "degrees", default="0..2", callback=_degrees, help="Degree or range.")
@click.option(
    "--backend",
    type=click.Choice([b.value for b in Backend] + ["both"]),
    default="both",
    show_default=True,
)
@click.option("--trials", type=int, default=10, show_default=True)
@out_option
@_checked
def preimage(degrees: Tuple[int, ...], backend: str, trials: int, out: Optional[str]) -> None:
    """Divergence preimages of random members of ring-calV2."""
    config = Config.current()
    split = powell_sabin_refine(reference_triangle())[0]
    rng = np.random.default_rng(config.run.seed)
    report = Report("preimage")
    report.set_meta("tolerance", config.tolerance.preimage)
    for r in degrees:
        target = build_space(split, Family.calV2, True, r)
        source = build_space(split, Family.L1, True, r + 1)
        for trial in range(trials):
            p = target.random_member(rng)
            row = {"r": r, "trial": trial}
            results = {}
            if backend in (Backend.constructive.value, "both"):
                results["constructive"] = div_preimage_constructive(p)
            if backend in (Backend.algebraic.value, "both"):
                results["algebraic"] = div_preimage_algebraic(p, source)
            for name, result in results.items():
                row["%s_residual" % name] = result.residual
                row["%s_trace" % name] = result.boundary_trace
                if result.residual > config.tolerance.preimage:
                    report.fail("%s r=%s trial %s residual %.3e" % (name, r, trial, result.residual))
                if result.boundary_trace > config.tolerance.membership:
                    report.fail("%s r=%s trial %s trace %.3e" % (name, r, trial, result.boundary_trace))
            if len(results) == 2:
                difference = results["constructive"].field - results["algebraic"].field
                kernel = divergence(difference).sup_norm() / max(p.sup_norm(), 1.0)
                row["difference_div"] = kernel
                if kernel > config.tolerance.preimage:
                    report.fail("r=%s trial %s: preimages differ outside ker(div)" % (r, trial))
            report.add_row(row)
    _finish(report, out)


@main.command("global-dims")
@mesh_option
@builtin_option
@click.option("--r", "degrees", default="2..4", callback=_degrees, help="Degree or range.")
@out_option
@_checked
def global_dims(mesh_path: Optional[str], builtin: str, degrees: Tuple[int, ...], out: Optional[str]) -> None:
    """Global dimensions against the vertex, edge and triangle counts."""
    sc = powell_sabin_refine(_load_mesh(mesh_path, builtin))
    report = Report("global-dims")
    for family in GLOBAL_FAMILIES:
        for r in degrees:
            formula = global_dimension_formula(family, sc, r)
            try:
                computed = assemble_global(sc, family, r).dim
            except ClientError:
                continue
            match = formula is None or formula == computed
            report.add_row(
                {"family": family.value, "r": r, "formula": formula, "computed": computed, "match": match}
            )
            if not match:
                report.fail("%s r=%s: %s != %s" % (family.value, r, computed, formula))
    _finish(report, out)


@main.command("global-exactness")
@mesh_option
@builtin_option
@click.option("--chain", type=click.Choice([s.value for s in GlobalSequence]), default="SLV", show_default=True)
@click.option("--r", "degrees", default="2", callback=_degrees, help="Degree or range.")
@out_option
@_checked
def global_exactness(
    mesh_path: Optional[str], builtin: str, chain: str, degrees: Tuple[int, ...], out: Optional[str]
) -> None:
    """Rank checks of a global sequence."""
    sc = powell_sabin_refine(_load_mesh(mesh_path, builtin))
    report = Report("global-exactness")
    for r in degrees:
        check = verify_global_exactness(sc, r, GlobalSequence(chain))
        report.add_row(
            {
                "chain": chain,
                "r": r,
                "dims": list(check.dims),
                "formulas": list(check.formulas),
                "rot_rank": check.rot_rank,
                "div_rank": check.div_rank,
                "rot_kernel": check.rot_kernel,
                "middle_gap": check.middle_gap,
                "deficit": check.deficit,
                "containment": check.containment,
                "exact": check.exact,
            }
        )
        if not check.exact:
            report.fail("%s r=%s is not exact" % (chain, r))
        if not check.dims_match:
            report.fail("%s r=%s dimensions differ from the closed forms" % (chain, r))
    _finish(report, out)


@main.command()
@mesh_option
@builtin_option
@click.option("--pair", type=click.Choice([s.value for s in GlobalSequence]), default="SLV", show_default=True)
@click.option("--r", type=int, default=None, help="Sequence degree, lowest admissible by default.")
@click.option("--refine", "levels", type=int, default=3, show_default=True, help="Uniform refinements.")
@click.option("--viscosity", type=float, default=1.0, show_default=True)
@out_option
@_checked
def stokes(
    mesh_path: Optional[str],
    builtin: str,
    pair: str,
    r: Optional[int],
    levels: int,
    viscosity: float,
    out: Optional[str],
) -> None:
    """Manufactured solution errors and inf-sup values over refinements."""
    config = Config.current()
    sequence = GlobalSequence(pair)
    if r is None:
        r = 2 if sequence == GlobalSequence.SLV else 3
    mesh = _load_mesh(mesh_path, builtin)
    rows = convergence_study(mesh, sequence, r, levels, viscosity)
    report = Report("stokes")
    report.set_meta("tolerance", config.tolerance.residual)
    for row in rows:
        report.add_row(
            {
                "level": row.level,
                "h": row.h,
                "dofs": row.dofs,
                "velocity_error": row.velocity_error,
                "pressure_error": row.pressure_error,
                "div_max": row.div_max,
                "infsup": row.infsup,
                "rate": "" if row.rate is None else row.rate,
            }
        )
        if row.div_max > config.tolerance.residual * max(row.h1_norm, 1.0):
            report.fail("level %s: divergence %.3e" % (row.level, row.div_max))
    errors = [row.velocity_error for row in rows]
    if any(b >= a for a, b in zip(errors, errors[1:])):
        report.fail("velocity errors do not decrease")
    if len(rows) > 1 and rows[-1].rate is not None and rows[-1].rate < r - 0.25:
        report.fail("observed order %.2f below %s" % (rows[-1].rate, r - 0.25))
    values = [row.infsup for row in rows]
    if len(values) > 1:
        ratio = max(values) / min(values) if min(values) > 0 else float("inf")
        report.set_meta("infsup_ratio", ratio)
        if min(values) <= 1e-3 or ratio > 5.0:
            report.fail("inf-sup values %s are not uniformly bounded" % ", ".join("%.3e" % v for v in values))
    _finish(report, out)
