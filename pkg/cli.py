"""Command-line front end for the branching pipeline.

    python cli.py branch --g B4 --drop 2 --a B2 --weight 0,1,0,2
    python cli.py branch --g B2^ --drop 1,2 --a A1^ --weight 1,0 --level 1 --max-grade 12 --format qseries
    python cli.py invariant --embedding-file fixtures/a1_a2_special.json --level 1
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from dotenv import load_dotenv

from branch import (BranchingTable, branch, format_branching_functions, format_table, recurrence_residual,
                    solve_recurrence)
from cft import assemble_partition_function, coset_characters, is_conformal
from embed import (Embedding, EmbeddingSpec, load_embedding_spec, orthogonal_pair, resolve_embedding)
from fan import compute_fan, weight_order_key
from oracle import brute_force_branch, diff_tables
from rootdata import (BranchingError, RootSystem, Weight, format_number, format_weight, from_dynkin_labels,
                      int_setting, parse_algebra, to_dynkin_labels)
from singular import CosetCache, build_singular_element

load_dotenv()

logger = logging.getLogger(__name__)

LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
DEFAULT_MAX_GRADE = int_setting('DEFAULT_MAX_GRADE', 6)

COMMANDS = ('fan', 'singular', 'branch', 'verify', 'coset', 'invariant')
FORMATS = ('table', 'json', 'qseries', 'grid')


@dataclass
class JobSpec:
    command: str
    embedding: EmbeddingSpec
    weight: Optional[Tuple[Fraction, ...]] = None
    level: Optional[int] = None
    max_grade: Optional[int] = None
    output_format: str = 'table'
    use_cache: bool = True

    def __post_init__(self):
        error_msg = None
        affine = self.embedding.g_spec.affine
        if self.command not in COMMANDS:
            error_msg = f"Unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}"
        elif self.output_format not in FORMATS:
            error_msg = f"Unknown format {self.output_format!r}; expected one of {', '.join(FORMATS)}"
        elif self.command in ('coset', 'invariant') and not affine:
            error_msg = f"The {self.command} command needs an affine algebra, got {self.embedding.g_spec}"
        elif self.command in ('singular', 'branch', 'verify', 'coset') and self.weight is None:
            error_msg = f"The {self.command} command needs --weight"
        elif affine and self.level is None and self.command != 'fan':
            error_msg = f"The {self.command} command on {self.embedding.g_spec} needs --level"
        if error_msg:
            logger.error(error_msg)
            raise ValueError(error_msg)
        if affine and self.max_grade is None:
            logger.info(f"No --max-grade given for affine job; using {DEFAULT_MAX_GRADE}")
            self.max_grade = DEFAULT_MAX_GRADE


def parse_labels(text: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(x.strip()) for x in text.split(',') if x.strip())
    except ValueError:
        error_msg = f"Cannot parse weight {text!r}; expected comma-separated Dynkin labels such as 0,1,0,2"
        logger.error(error_msg)
        raise ValueError(error_msg)


def job_from_args(args: argparse.Namespace) -> JobSpec:
    if args.embedding_file:
        spec = load_embedding_spec(args.embedding_file)
    else:
        if not args.g or not args.a:
            error_msg = "Give either --embedding-file or both --g and --a"
            logger.error(error_msg)
            raise ValueError(error_msg)
        drop = [int(x) for x in args.drop.split(',') if x.strip()] if args.drop else []
        spec = EmbeddingSpec('regular', parse_algebra(args.g), parse_algebra(args.a), tuple(drop))
    return JobSpec(
        command=args.command,
        embedding=spec,
        weight=parse_labels(args.weight) if args.weight else None,
        level=args.level,
        max_grade=args.max_grade,
        output_format=args.format,
        use_cache=not args.no_cache,
    )


def highest_weight(job: JobSpec, g: RootSystem) -> Weight:
    if g.affine:
        return from_dynkin_labels(job.weight, g, level=job.level)
    return from_dynkin_labels(job.weight, g)


def render_grid(terms: Dict[Weight, int], a: RootSystem) -> str:
    """Character grid of a rank-1 or rank-2 finite element, or a rank-1 affine one (rows are grades)."""
    if a.rank > 2 or (a.affine and a.rank != 1):
        error_msg = f"Grids are drawn for rank-1 or rank-2 finite and rank-1 affine algebras, not {a.label}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    cells = {}
    for w, c in terms.items():
        labels = to_dynkin_labels(w, a)
        if any(x.denominator != 1 for x in labels):
            error_msg = f"Weight {w.finite} has non-integral labels {labels}"
            logger.error(error_msg)
            raise ValueError(error_msg)
        x = int(labels[0])
        y = int(w.grade) if a.affine else (int(labels[1]) if a.rank == 2 else 0)
        cells[(x, y)] = c
    if not cells:
        return "(empty)"
    xs = range(min(k[0] for k in cells), max(k[0] for k in cells) + 1)
    ys = range(max(k[1] for k in cells), min(k[1] for k in cells) - 1, -1)
    width = max(len(str(c)) for c in cells.values()) + 1
    margin = max(len(str(y)) for y in ys) + 1
    lines = [" " * margin + "".join(str(x).rjust(width) for x in xs)]
    for y in ys:
        row = "".join(str(cells[(x, y)]).rjust(width) if (x, y) in cells else ".".rjust(width) for x in xs)
        lines.append(str(y).rjust(margin) + row)
    return "\n".join(lines)


def _rows(terms: Dict[Weight, int], a: RootSystem) -> str:
    ordered = sorted(terms.items(), key=lambda item: weight_order_key(item[0], a), reverse=True)
    return "\n".join(f"{format_weight(w, a)}\t{c}" for w, c in ordered)


def _run_fan(job: JobSpec, embedding: Embedding) -> str:
    orth = orthogonal_pair(embedding)
    fan = compute_fan(embedding, orth, job.max_grade)
    a = embedding.a
    if job.output_format == 'json':
        return json.dumps({
            "embedding": job.embedding.to_json(),
            "a_perp": orth.a_perp_type,
            "x_e": format_number(orth.x_e),
            "gamma0": format_weight(fan.gamma0, a),
            "s_gamma0": fan.s_gamma0,
            "fan": [{"gamma": format_weight(g, a), "s": s} for g, s in fan.rows(a)],
        }, indent=2)
    if job.output_format == 'grid':
        return render_grid(fan.shifted_terms, a)
    header = f"gamma0 = {format_weight(fan.gamma0, a)}\ts(gamma0) = {fan.s_gamma0}\ta_perp = {orth.a_perp_type}"
    body = "\n".join(f"{format_weight(g, a)}\t{s}" for g, s in fan.rows(a))
    return header + ("\n" + body if body else "")


def _run_singular(job: JobSpec, embedding: Embedding, cache: Optional[CosetCache]) -> str:
    orth = orthogonal_pair(embedding)
    mu = highest_weight(job, embedding.g)
    sing = build_singular_element(mu, embedding, orth, job.max_grade, cache)
    a = embedding.a
    if job.output_format == 'json':
        return json.dumps({"module": format_weight(mu, embedding.g), "u_count": len(sing.points),
                           "singular_element": sing.terms.to_json(a)}, indent=2)
    if job.output_format == 'grid':
        return render_grid(sing.terms.terms, a)
    return _rows(sing.terms.terms, a)


def _run_branch(job: JobSpec, embedding: Embedding, cache: Optional[CosetCache]) -> Tuple[BranchingTable, Weight]:
    mu = highest_weight(job, embedding.g)
    return branch(mu, embedding, job.max_grade, cache=cache), mu


def _render_branch(job: JobSpec, embedding: Embedding, table: BranchingTable, mu: Weight) -> str:
    if job.output_format == 'json':
        return json.dumps(table.to_json(format_weight(mu, embedding.g), job.embedding.to_json()), indent=2)
    if job.output_format == 'qseries':
        return format_branching_functions(table)
    if job.output_format == 'grid':
        return render_grid(table.entries, embedding.a)
    return format_table(table)


def _run_verify(job: JobSpec, embedding: Embedding, cache: Optional[CosetCache]) -> Dict:
    orth = orthogonal_pair(embedding)
    mu = highest_weight(job, embedding.g)
    fan = compute_fan(embedding, orth, job.max_grade)
    sing = build_singular_element(mu, embedding, orth, job.max_grade, cache)
    anom = solve_recurrence(sing, fan, embedding.a, job.max_grade)
    residual = recurrence_residual(anom, sing, fan)
    engine = branch(mu, embedding, job.max_grade, orth=orth, fan=fan, cache=cache)
    oracle = brute_force_branch(mu, embedding, job.max_grade)
    diff = diff_tables(engine, oracle)
    a = embedding.a
    return {
        'success': not diff and not residual,
        'engine': {format_weight(nu, a): c for nu, c in engine.rows()},
        'oracle': {format_weight(nu, a): c for nu, c in oracle.rows()},
        'diff': {format_weight(nu, a): pair for nu, pair in diff.items()},
        'residual': {format_weight(xi, a): v for xi, v in residual.items()},
    }


def _run_coset(job: JobSpec, embedding: Embedding, cache: Optional[CosetCache]) -> str:
    table, mu = _run_branch(job, embedding, cache)
    characters = coset_characters(table, mu, embedding, job.level)
    a = embedding.a
    if job.output_format == 'json':
        return json.dumps({format_weight(nu, a): chi.to_json() for nu, chi in characters.items()}, indent=2)
    return "\n".join(f"chi_{format_weight(nu, a)} = {chi}" for nu, chi in characters.items())


def _run_invariant(job: JobSpec, embedding: Embedding) -> str:
    report = is_conformal(embedding, job.level)
    pf = assemble_partition_function(embedding, job.level, job.max_grade)
    if job.output_format == 'json':
        data = pf.to_json()
        data["central_charge"] = format_number(report['c_g'])
        return json.dumps(data, indent=2)
    return pf.render()


def run(job: JobSpec) -> Tuple[int, str]:
    """Execute one job; returns (exit status, rendered output)."""
    try:
        embedding = resolve_embedding(job.embedding)
        cache = None if job.use_cache else CosetCache(enabled=False)
        if job.command == 'fan':
            return 0, _run_fan(job, embedding)
        if job.command == 'singular':
            return 0, _run_singular(job, embedding, cache)
        if job.command == 'branch':
            table, mu = _run_branch(job, embedding, cache)
            return 0, _render_branch(job, embedding, table, mu)
        if job.command == 'verify':
            result = _run_verify(job, embedding, cache)
            return (0 if result['success'] else 1), json.dumps(result, indent=2)
        if job.command == 'coset':
            return 0, _run_coset(job, embedding, cache)
        return 0, _run_invariant(job, embedding)
    except BranchingError as e:
        logger.error(f"{e.stage}: {e}")
        return 1, f"error [{e.stage}]: {e}"
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return 1, f"error: {e}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Branching coefficients by injection-fan recurrence")
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--g', help="ambient algebra, e.g. B4 or B2^")
    parser.add_argument('--a', help="subalgebra, e.g. B2 or A1^")
    parser.add_argument('--drop', help="comma-separated extended-diagram nodes to delete (0 is the extra node)")
    parser.add_argument('--embedding-file', help="JSON embedding description")
    parser.add_argument('--weight', help="highest weight as comma-separated Dynkin labels")
    parser.add_argument('--level', type=int, help="level of the affine module")
    parser.add_argument('--max-grade', type=int, help="grade cutoff for affine computations")
    parser.add_argument('--format', choices=FORMATS, default='table')
    parser.add_argument('--no-cache', action='store_true', help="do not reuse coset representatives")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, LOG_LEVEL, logging.INFO)
    )
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
    except (ValueError, BranchingError) as e:
        logger.error(f"Invalid job: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    status, output = run(job)
    print(output, file=sys.stdout if status == 0 else sys.stderr)
    return status


if __name__ == '__main__':
    sys.exit(main())
