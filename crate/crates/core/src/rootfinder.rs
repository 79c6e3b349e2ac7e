//! Sign-scan and bisection over energy, and root tracking across orders.

use rug::Float;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::parallel::Executor;
use crate::precision::{agreeing_digits, format_significant, PrecisionContext};
use crate::recurrence::Recurrence;

/// Largest grid the refinement loop will reach, as a multiple of the
/// initial grid.
const MAX_REFINEMENT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanWindow {
    pub e_min: Float,
    pub e_max: Float,
    pub grid_points: usize,
}

impl ScanWindow {
    pub fn new(e_min: Float, e_max: Float, grid_points: usize) -> Result<Self> {
        if e_min >= e_max {
            return Err(Error::Input("scan window needs e_min < e_max".into()));
        }
        if grid_points < 8 {
            return Err(Error::Input(
                "scan window needs at least 8 grid points".into(),
            ));
        }
        Ok(Self {
            e_min,
            e_max,
            grid_points,
        })
    }

    /// Window covering roughly the lowest `levels` states of each parity,
    /// from harmonic estimates `(2l+1) sqrt(v2)` inflated for the
    /// anharmonic terms.
    pub fn default_for(potential: &PotentialSpec, levels: usize, ctx: &PrecisionContext) -> Self {
        let v2 = potential.quadratic_coeff(ctx).to_f64();
        let omega = v2.abs().sqrt().max(1.0);
        let anharmonic = potential
            .even_series()
            .iter()
            .filter(|(k, _)| **k > 2)
            .map(|(_, c)| c.to_f64().abs())
            .sum::<f64>();
        let singular = potential.singular_coeff().to_f64().max(0.0);
        let top = (2 * levels + 2) as f64 * omega * (1.0 + anharmonic).powf(1.0 / 3.0) * 2.0
            + 2.0 * (1.0 + 4.0 * singular).sqrt();
        // Lowest point of the potential bounds every eigenvalue from below.
        let bottom = if v2 < 0.0 {
            let quartic = potential.even_series().get(&4).map_or(1.0, |c| c.to_f64());
            -(v2 * v2) / (4.0 * quartic.max(1e-12)) - 1.0
        } else {
            0.0
        };
        Self {
            e_min: ctx.float(bottom.floor()),
            e_max: ctx.float(top.ceil()),
            grid_points: 64.max(8 * levels),
        }
    }
}

fn sign(x: &Float) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_sign_negative() {
        -1
    } else {
        1
    }
}

/// A sample of `f` on the energy axis.
#[derive(Clone)]
struct Node {
    e: Float,
    sign: i8,
}

/// Zeros of `f` in `window`: parallel sign scan, grid doubling until the
/// number of sign changes is stable, then bisection to `ctx.bisection_tol()`.
pub fn find_roots<F>(
    f: F,
    window: &ScanWindow,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Result<Float> + Sync + Send,
{
    let n = window.grid_points;
    let width = ctx.float(&window.e_max - &window.e_min);
    let energies: Vec<Float> = (0..=n)
        .map(|i| ctx.float(&width * i as u64) / n as u64 + &window.e_min)
        .collect();
    let mut nodes = sample(&f, energies, exec)?;
    let mut count = count_roots(&nodes);
    let mut grid = n;
    while grid < n * MAX_REFINEMENT {
        let mids: Vec<Float> = nodes
            .windows(2)
            .map(|w| ctx.float(&w[0].e + &w[1].e) / 2u32)
            .collect();
        let mid_nodes = sample(&f, mids, exec)?;
        let last = nodes.last().cloned().expect("grid has nodes");
        let mut merged = Vec::with_capacity(nodes.len() + mid_nodes.len());
        for (node, mid) in nodes.into_iter().zip(mid_nodes) {
            merged.push(node);
            merged.push(mid);
        }
        merged.push(last);
        nodes = merged;
        grid *= 2;
        let refined = count_roots(&nodes);
        if refined == count {
            break;
        }
        count = refined;
    }

    enum Job {
        Exact(Float),
        Bracket(Float, Float, i8),
    }
    let mut jobs = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if node.sign == 0 {
            jobs.push(Job::Exact(node.e.clone()));
        } else if let Some(next) = nodes.get(i + 1) {
            if next.sign != 0 && next.sign != node.sign {
                jobs.push(Job::Bracket(node.e.clone(), next.e.clone(), node.sign));
            }
        }
    }
    let tol = ctx.bisection_tol();
    let roots = exec.map(&jobs, |job| match job {
        Job::Exact(e) => Ok(e.clone()),
        Job::Bracket(lo, hi, s) => bisect(&f, lo.clone(), hi.clone(), *s, &tol, ctx),
    });
    roots.into_iter().collect()
}

fn sample<F>(f: &F, energies: Vec<Float>, exec: &Executor) -> Result<Vec<Node>>
where
    F: Fn(&Float) -> Result<Float> + Sync + Send,
{
    let values = exec.map(&energies, |e| f(e).map(|v| sign(&v)));
    energies
        .into_iter()
        .zip(values)
        .map(|(e, s)| s.map(|sign| Node { e, sign }))
        .collect()
}

fn count_roots(nodes: &[Node]) -> usize {
    let zeros = nodes.iter().filter(|n| n.sign == 0).count();
    let changes = nodes
        .windows(2)
        .filter(|w| w[0].sign != 0 && w[1].sign != 0 && w[0].sign != w[1].sign)
        .count();
    zeros + changes
}

fn bisect<F>(
    f: &F,
    mut lo: Float,
    mut hi: Float,
    lo_sign: i8,
    tol: &Float,
    ctx: &PrecisionContext,
) -> Result<Float>
where
    F: Fn(&Float) -> Result<Float>,
{
    while ctx.float(&hi - &lo) > *tol {
        let mid = ctx.float(&lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            return Err(Error::Stagnation {
                lo: format_significant(&lo, ctx.digits() as usize),
                hi: format_significant(&hi, ctx.digits() as usize),
            });
        }
        match sign(&f(&mid)?) {
            0 => return Ok(mid),
            s if s == lo_sign => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(ctx.float(&lo + &hi) / 2u32)
}

/// Zeros of `E -> a_{target}[E]` at expansion order `order`, ascending.
pub fn roots_at_order(
    rec: &Recurrence,
    order: usize,
    window: &ScanWindow,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Vec<Float>> {
    if order == 0 {
        return Err(Error::Input("expansion order must be at least 1".into()));
    }
    find_roots(|e| rec.coefficient_at(e, order, ctx), window, ctx, exec)
}

/// One level followed across increasing orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub level: usize,
    pub per_order: Vec<(usize, Float)>,
    pub stabilized_digits: u32,
    pub converged: bool,
}

impl Trace {
    pub fn energy(&self) -> &Float {
        &self.per_order.last().expect("traces are never empty").1
    }

    /// Digits shared by the entries at `order` and at the preceding order.
    pub fn stabilized_at(&self, order: usize, cap: u32) -> Option<u32> {
        let i = self.per_order.iter().position(|(o, _)| *o == order)?;
        if i == 0 {
            return Some(0);
        }
        Some(agreeing_digits(
            &self.per_order[i - 1].1,
            &self.per_order[i].1,
            cap,
        ))
    }

    /// Agreement between each consecutive pair of entries.
    pub fn agreement_history(&self, cap: u32) -> Vec<u32> {
        self.per_order
            .windows(2)
            .map(|w| agreeing_digits(&w[0].1, &w[1].1, cap))
            .collect()
    }
}

/// Traces that reach the largest order, plus roots that were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracking {
    pub traces: Vec<Trace>,
    pub spurious: Vec<(usize, Float)>,
}

impl Tracking {
    /// Converged traces only.
    pub fn converged(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter().filter(|t| t.converged)
    }

    /// Trace whose final energy is nearest to `e`.
    pub fn nearest(&self, e: &Float) -> Option<&Trace> {
        self.traces.iter().min_by(|a, b| {
            let da = Float::with_val(e.prec(), a.energy() - e).abs();
            let db = Float::with_val(e.prec(), b.energy() - e).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

/// Match roots found at each order into per-level traces.
///
/// Traces and next-order roots are paired closest-first (ties go to the
/// lower root). A pair is admissible only if the drift does not exceed the
/// root's distance to its nearest neighbour; a trace left without a root
/// has lost its level and its roots are reported as spurious. Unclaimed roots start new
/// traces.
pub fn link_traces(
    per_order: &[(usize, Vec<Float>)],
    target_digits: u32,
    ctx: &PrecisionContext,
) -> Result<Tracking> {
    if per_order.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Input("orders must be strictly increasing".into()));
    }
    let Some(last_order) = per_order.last().map(|(o, _)| *o) else {
        return Ok(Tracking {
            traces: Vec::new(),
            spurious: Vec::new(),
        });
    };
    let mut open: Vec<Vec<(usize, Float)>> = Vec::new();
    let mut spurious = Vec::new();
    for (order, roots) in per_order {
        // Global greedy matching: closest (trace, root) pairs first; equal
        // distances resolve to the lower root.
        let mut pairs: Vec<(Float, usize, usize)> = Vec::new();
        for (t, trace) in open.iter().enumerate() {
            let last = &trace.last().unwrap().1;
            for (i, r) in roots.iter().enumerate() {
                let d = ctx.float(r - last).abs();
                if d <= local_gap(roots, i, ctx) {
                    pairs.push((d, i, t));
                }
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut taken = vec![false; roots.len()];
        let mut assigned: Vec<Option<usize>> = vec![None; open.len()];
        for (_, i, t) in pairs {
            if !taken[i] && assigned[t].is_none() {
                taken[i] = true;
                assigned[t] = Some(i);
            }
        }
        let mut still_open = Vec::new();
        for (trace, slot) in open.drain(..).zip(assigned) {
            match slot {
                Some(i) => {
                    let mut t = trace;
                    t.push((*order, roots[i].clone()));
                    still_open.push(t);
                }
                None => spurious.extend(trace),
            }
        }
        for (i, r) in roots.iter().enumerate() {
            if !taken[i] {
                still_open.push(vec![(*order, r.clone())]);
            }
        }
        still_open.sort_by(|a, b| {
            a.last()
                .unwrap()
                .1
                .partial_cmp(&b.last().unwrap().1)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        open = still_open;
    }
    let cap = ctx.digits();
    let traces = open
        .into_iter()
        .filter(|t| t.last().map(|(o, _)| *o) == Some(last_order))
        .enumerate()
        .map(|(level, per_order)| {
            let mut trace = Trace {
                level,
                per_order,
                stabilized_digits: 0,
                converged: false,
            };
            let history = trace.agreement_history(cap);
            trace.stabilized_digits = history.last().copied().unwrap_or(0);
            let tail = &history[history.len().saturating_sub(3)..];
            let monotone = tail.windows(2).all(|w| w[0] <= w[1]);
            trace.converged = trace.stabilized_digits >= target_digits && monotone;
            trace
        })
        .collect();
    Ok(Tracking { traces, spurious })
}

/// Distance from `roots[i]` to its nearest neighbour (unbounded when alone).
fn local_gap(roots: &[Float], i: usize, ctx: &PrecisionContext) -> Float {
    let mut gap = ctx.float(rug::float::Special::Infinity);
    if i > 0 {
        gap = gap.min(&ctx.float(&roots[i] - &roots[i - 1]));
    }
    if i + 1 < roots.len() {
        gap = gap.min(&ctx.float(&roots[i + 1] - &roots[i]));
    }
    gap
}

/// Roots at every order in `orders`, linked into traces.
pub fn track(
    rec: &Recurrence,
    orders: &[usize],
    window: &ScanWindow,
    target_digits: u32,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Tracking> {
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("orders must be strictly increasing".into()));
    }
    let per_order = orders
        .iter()
        .map(|&order| Ok((order, roots_at_order(rec, order, window, ctx, exec)?)))
        .collect::<Result<Vec<_>>>()?;
    link_traces(&per_order, target_digits, ctx)
}

/// Number of leading digits on which two quasi-degenerate levels agree.
///
/// Both traces must be stabilized beyond the split, otherwise the count
/// would only measure truncation noise.
pub fn certify_degeneracy_split(even: &Trace, odd: &Trace, ctx: &PrecisionContext) -> Result<u32> {
    let split = agreeing_digits(even.energy(), odd.energy(), ctx.digits());
    let stabilized = even.stabilized_digits.min(odd.stabilized_digits);
    if !(even.converged && odd.converged) || stabilized <= split {
        return Err(Error::InsufficientConvergence {
            stabilized,
            needed: split,
        });
    }
    Ok(split)
}
