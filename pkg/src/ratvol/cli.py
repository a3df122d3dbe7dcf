"""Command-line front end: ``ratvol {simulate,filter,estimate,moments,density}``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from . import moments as mo
from . import numerics as nx
from . import ratpdf as rp
from . import sbt
from . import sim
from . import svfilter as sf
from .errors import ConfigError, RatvolError, StepFailure

log = logging.getLogger('ratvol')

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# I/O helpers

def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + '\n'


def _write_text(path, text):
    if path in (None, '-'):
        sys.stdout.write(text)
        return None
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
    return path


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_manifest(args, outputs, inputs=(), seed=None):
    """Write ``<output>.manifest.json`` next to every file output."""
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ('func', 'verbose') and not callable(v)}
    manifest = {'subcommand': args.command, 'config': config, 'seed': seed,
                'inputs': [os.path.abspath(p) for p in inputs],
                'outputs': [os.path.abspath(p) for p in outputs if p],
                'version': __version__}
    written = []
    for p in outputs:
        if p:
            mp = p + '.manifest.json'
            with open(mp, 'w', encoding='utf-8') as fh:
                fh.write(_dump_json(manifest))
            written.append(mp)
    return written


def read_series(path, column=None, price_column=None):
    """Observation column ``y`` or log returns of a price column."""
    try:
        with open(path, newline='', encoding='utf-8') as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            fields = reader.fieldnames or []
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if price_column is not None:
        if price_column not in fields:
            raise ConfigError(f"column {price_column!r} not found in {path}")
        try:
            s = np.array([float(r[price_column]) for r in rows])
        except ValueError as exc:
            raise ConfigError(f"non-numeric price in {path}: {exc}") from exc
        if np.any(s <= 0):
            raise ConfigError("prices must be positive")
        ys = np.diff(np.log(s))
    else:
        col = column or 'y'
        if col not in fields:
            raise ConfigError(f"column {col!r} not found in {path}")
        try:
            ys = np.array([float(r[col]) for r in rows])
        except ValueError as exc:
            raise ConfigError(f"non-numeric observation in {path}: {exc}") from exc
    if ys.size == 0:
        raise ConfigError(f"no observations in {path}")
    if not np.all(np.isfinite(ys)):
        raise ConfigError("observations must be finite")
    return ys


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(',') if v.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}") from exc


def _odd_df(name, v):
    if v < 3 or v % 2 == 0:
        raise ConfigError(f"{name} must be an odd integer >= 3 (rational density), got {v}")


def _model_from_args(args):
    for name in ('n_w', 'n_u', 'n_x'):
        _odd_df(name, getattr(args, name))
    return sf.SvModel.scaled_t(a=args.a, psi=args.psi, sigma=args.sigma, d=args.d,
                                    n_W=args.n_w, n_U=args.n_u, n_X=args.n_x)


def _add_model_flags(p, a=0.9, psi=1.0, sigma=1.0):
    p.add_argument('--a', type=float, default=a, help='AR coefficient of the state')
    p.add_argument('--psi', type=float, default=psi, help='output scale')
    p.add_argument('--sigma', type=float, default=sigma, help='volatility argument scale')
    p.add_argument('--d', type=int, default=4, help='degree of V')
    p.add_argument('--n-w', type=int, default=9, help='dof of the state noise')
    p.add_argument('--n-u', type=int, default=3, help='dof of the observation noise')


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args):
    v = _floats(args.v_coeffs) if args.v_coeffs else None
    cfg = sim.SimConfig(a=args.a, psi=args.psi, sigma=args.sigma, T=args.T, seed=args.seed,
                        n_X=args.n_x, n_W=args.n_w, n_U=args.n_u, d=args.d, v_coeffs=v)
    xs, ys = sim.simulate(cfg)
    text = _csv_text(['t', 'x', 'y'], zip(range(1, cfg.T + 1), xs, ys))
    out = _write_text(args.out, text)
    if out:
        write_manifest(args, [out], seed=args.seed)
    return EXIT_OK


def _checkpoint_dump(state, path):
    doc = {'t': state.t, 'loglik': state.loglik,
           'predictive': rp.pdf_to_json_dict(state.predictive), 'version': __version__}
    tmp = path + '.tmp'
    with open(tmp, 'w', encoding='utf-8') as fh:
        fh.write(_dump_json(doc))
    os.replace(tmp, path)


def _checkpoint_load(path):
    try:
        with open(path, encoding='utf-8') as fh:
            doc = json.load(fh)
        pred = rp.pdf_from_json_dict(doc['predictive'])
        return sf.FilterState(pred, int(doc['t']), float(doc['loglik']), ())
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load checkpoint {path}: {exc}") from exc


STEP_COLUMNS = ['t', 'y', 'c_t', 'loglik', 'mean_x', 'mean_v', 'forecast_absY',
                'n_full', 'm_reduced', 'bound']


def cmd_filter(args):
    if not 0 < args.tau < 1:
        raise ConfigError("--tau must lie in (0, 1)")
    ys = read_series(args.input, args.column, args.price_column)
    model = _model_from_args(args)
    state = None
    if args.resume:
        state = _checkpoint_load(args.resume)
        ys = ys[state.t - 1:]
    grid = None
    if args.grid_out:
        grid = np.linspace(args.grid_min, args.grid_max, args.grid_points)
    records = []
    grid_rows = []

    def on_state(st):
        dg = st.diagnostics[-1]
        rec = dg.as_record()
        records.append([rec[k] for k in STEP_COLUMNS])
        if args.verbose:
            sys.stderr.write(json.dumps({'event': 'step', **rec}, sort_keys=True) + '\n')
        if grid is not None:
            vals = rp.pdf_eval(st.predictive, grid)
            grid_rows.extend((dg.t + 1, x, v) for x, v in zip(grid, vals))
        if args.checkpoint:
            _checkpoint_dump(st, args.checkpoint)

    try:
        sf.run(model, ys, tau=args.tau, state=state, callback=on_state)
    except StepFailure as exc:
        # keep what was computed so far
        _write_text(args.out, _csv_text(STEP_COLUMNS, records))
        sys.stderr.write(f"ratvol filter: numerical failure at step {exc.t}: {exc.cause}\n")
        return EXIT_NUMERIC
    outs = [_write_text(args.out, _csv_text(STEP_COLUMNS, records))]
    if grid is not None:
        outs.append(_write_text(args.grid_out, _csv_text(['t', 'x', 'pdf'], grid_rows)))
    write_manifest(args, outs, inputs=[args.input])
    return EXIT_OK


def _spec_from_args(args, a=None):
    return mo.MomentSpec.scaled_t(args.a if a is None else a, args.psi, args.sigma,
                                  d=args.d, n_W=args.n_w, n_U=args.n_u)


def cmd_estimate(args):
    ys = read_series(args.input, args.column, args.price_column)
    spec = mo.MomentSpec.scaled_t(0.5, 1.0, 1.0, d=args.d, n_W=args.n_w, n_U=args.n_u)
    grid = {'a': _floats(args.a_grid), 'sigma': _floats(args.sigma_grid)}
    res = mo.mm_estimate(ys, args.lags, grid, spec=spec)
    doc = res.as_dict()
    outs = [_write_text(args.out, _dump_json(doc))]
    if args.acf_out:
        z = np.abs(ys)
        samp = mo.sample_moment_vector(z, args.lags)
        fit = mo.moment_vector(spec, args.lags, res.a_hat, res.psi_hat, res.sigma_hat)
        rows = [(k, samp[k + 1] / samp[1], fit[k + 1] / fit[1]) for k in range(args.lags + 1)]
        outs.append(_write_text(args.acf_out, _csv_text(['lag', 'sample_acf', 'fitted_acf'], rows)))
    write_manifest(args, outs, inputs=[args.input], seed=args.seed)
    return EXIT_OK


def cmd_moments(args):
    spec = _spec_from_args(args)
    mean, var, acov = mo.absY_moments(spec, args.lags)
    corr = [c / var if var > 0 else 0.0 for c in acov]
    doc = {'a': args.a, 'psi': args.psi, 'sigma': args.sigma, 'mean_absY': mean,
           'var_absY': var, 'acov_absY': list(acov), 'corr_absY': corr}
    out = _write_text(args.out, _dump_json(doc))
    if out:
        write_manifest(args, [out])
    return EXIT_OK


def _load_pdf(path):
    try:
        with open(path, encoding='utf-8') as fh:
            return rp.pdf_from_json_dict(json.load(fh))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load density {path}: {exc}") from exc


def cmd_density(args):
    action = args.action
    if action == 'make':
        if args.kind == 'cauchy':
            p = rp.make_cauchy(args.scale, args.loc)
        else:
            _odd_df('--df', args.df)
            p = rp.make_scaled_t_odd(args.df, args.variance)
        doc = rp.pdf_to_json_dict(p)
    elif action == 'eval':
        p = _load_pdf(args.pdf)
        xs = np.linspace(args.grid_min, args.grid_max, args.grid_points) \
            if args.x is None else np.array(_floats(args.x))
        vals = rp.pdf_eval(p, xs)
        out = _write_text(args.out, _csv_text(['x', 'pdf'], zip(xs, vals)))
        if out:
            write_manifest(args, [out], inputs=[args.pdf])
        return EXIT_OK
    elif action == 'convolve':
        p1, p2 = _load_pdf(args.pdf1), _load_pdf(args.pdf2)
        z = rp.normalized(rp.convolve(rp.normalized(p1.summand), rp.normalized(p2.summand)))
        doc = rp.pdf_to_json_dict(rp.RationalPdf(z, 1.0, min(p1.codegree, p2.codegree)))
    else:  # reduce
        p = _load_pdf(args.pdf)
        zr, bound, m, bal = sbt.truncate_to_tolerance(rp.normalized(p.summand), args.tau)
        doc = rp.pdf_to_json_dict(rp.RationalPdf(rp.normalized(zr), 1.0, p.codegree))
        doc['reduction'] = {'n': int(bal.summand.n + bal.dropped.size), 'm': int(m),
                            'c': int(bal.codegree_half), 'bound': bound}
        if args.verbose:
            sys.stderr.write(json.dumps({'event': 'truncate', **doc['reduction']},
                                        sort_keys=True) + '\n')
    out = _write_text(args.out, _dump_json(doc))
    if out:
        write_manifest(args, [out])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser():
    p = _Parser(prog='ratvol', description=__doc__.splitlines()[0])
    p.add_argument('--version', action='version', version=f'ratvol {__version__}')
    p.add_argument('-v', '--verbose', action='store_true',
                   help='emit JSON-line diagnostics on stderr')
    sub = p.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    s = sub.add_parser('simulate', help='simulate a path, CSV (t, x, y)')
    _add_model_flags(s)
    s.add_argument('--T', type=int, default=100)
    s.add_argument('--seed', type=int, default=0)
    s.add_argument('--n-x', type=int, default=9, help='dof of the initial state')
    s.add_argument('--v-coeffs', default=None,
                   help='ascending coefficients of V, comma separated (overrides --d)')
    s.add_argument('--out', default='-')
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser('filter', help='run the exact filter on an observation CSV')
    f.add_argument('--input', required=True)
    f.add_argument('--column', default=None, help='observation column (default y)')
    f.add_argument('--price-column', default=None,
                   help='use log returns of this price column instead')
    _add_model_flags(f, psi=2.0, sigma=1.5)
    f.add_argument('--n-x', type=int, default=9)
    f.add_argument('--tau', type=float, default=0.02)
    f.add_argument('--out', default='-')
    f.add_argument('--grid-out', default=None, help='CSV dump of each predictive pdf')
    f.add_argument('--grid-min', type=float, default=-20.0)
    f.add_argument('--grid-max', type=float, default=20.0)
    f.add_argument('--grid-points', type=int, default=400)
    f.add_argument('--checkpoint', default=None, help='write state after every step')
    f.add_argument('--resume', default=None, help='resume from a checkpoint file')
    f.set_defaults(func=cmd_filter)

    e = sub.add_parser('estimate', help='method-of-moments fit of (a, psi, sigma)')
    e.add_argument('--input', required=True)
    e.add_argument('--column', default=None)
    e.add_argument('--price-column', default=None)
    e.add_argument('--lags', type=int, default=10)
    e.add_argument('--a-grid', default='0.2,0.5,0.8,0.95')
    e.add_argument('--sigma-grid', default='0.5,1.0')
    e.add_argument('--d', type=int, default=4)
    e.add_argument('--n-w', type=int, default=9)
    e.add_argument('--n-u', type=int, default=3)
    e.add_argument('--seed', type=int, default=0, help='recorded in the manifest')
    e.add_argument('--out', default='-')
    e.add_argument('--acf-out', default=None, help='CSV of sample vs fitted ACF')
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser('moments', help='closed-form moments of |Y|')
    _add_model_flags(m)
    m.add_argument('--lags', type=int, default=1)
    m.add_argument('--out', default='-')
    m.set_defaults(func=cmd_moments)

    d = sub.add_parser('density', help='make / eval / convolve / reduce rational pdfs')
    dsub = d.add_subparsers(dest='action', parser_class=_Parser)
    dsub.required = True
    mk = dsub.add_parser('make')
    mk.add_argument('--kind', choices=['cauchy', 't'], required=True)
    mk.add_argument('--scale', type=float, default=1.0)
    mk.add_argument('--loc', type=float, default=0.0)
    mk.add_argument('--df', type=int, default=3)
    mk.add_argument('--variance', type=float, default=1.0)
    mk.add_argument('--out', default='-')
    ev = dsub.add_parser('eval')
    ev.add_argument('--pdf', required=True)
    ev.add_argument('--x', default=None, help='comma separated points')
    ev.add_argument('--grid-min', type=float, default=-20.0)
    ev.add_argument('--grid-max', type=float, default=20.0)
    ev.add_argument('--grid-points', type=int, default=400)
    ev.add_argument('--out', default='-')
    cv = dsub.add_parser('convolve')
    cv.add_argument('pdf1')
    cv.add_argument('pdf2')
    cv.add_argument('--out', default='-')
    rd = dsub.add_parser('reduce')
    rd.add_argument('--pdf', required=True)
    rd.add_argument('--tau', type=float, default=0.02)
    rd.add_argument('--out', default='-')
    d.set_defaults(func=cmd_density)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"ratvol: {exc}\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        nx.rank_tol()
    except ValueError as exc:
        sys.stderr.write(f"ratvol: {exc}\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        sys.stderr.write(f"ratvol {args.command}: {exc}\n")
        return EXIT_USAGE
    except StepFailure as exc:
        sys.stderr.write(f"ratvol {args.command}: numerical failure at step {exc.t}: {exc.cause}\n")
        return EXIT_NUMERIC
    except (RatvolError, np.linalg.LinAlgError, ArithmeticError) as exc:
        sys.stderr.write(f"ratvol {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
