//! Test oracles shared by the integration tests: a brute-force MIP solver
//! with an exact vertex-enumeration LP for the continuous part, and random
//! instance generators.
#![allow(dead_code)]

use presolve::model::{Problem, ProblemBuilder};
use presolve::numerics::{NumericContext, Real};
use presolve::postsolve::postsolve_primal;
use presolve::scheduler::{presolve, PresolveOptions, PresolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<R> {
    Infeasible,
    Optimal { value: R, x: Vec<R> },
}

impl<R: Real> Outcome<R> {
    pub fn value(&self) -> Option<&R> {
        match self {
            Outcome::Optimal { value, .. } => Some(value),
            Outcome::Infeasible => None,
        }
    }
}

/// One inequality `coeffs . x <= rhs` over the continuous columns.
struct Halfspace<R> {
    coeffs: Vec<R>,
    rhs: R,
}

/// Solves the square system `a x = b` by Gaussian elimination; `None` when
/// it is singular.
fn solve_square<R: Real>(mut a: Vec<Vec<R>>, mut b: Vec<R>) -> Option<Vec<R>> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&r| !a[r][k].is_zero())
            .max_by(|&r, &s| a[r][k].abs().partial_cmp(&a[s][k].abs()).expect("finite"))?;
        if a[pivot][k].abs().to_f64() < 1e-12 {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for r in k + 1..n {
            let f = a[r][k].clone() / a[k][k].clone();
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                a[r][c] = a[r][c].clone() - f.clone() * a[k][c].clone();
            }
            b[r] = b[r].clone() - f * b[k].clone();
        }
    }
    let mut x = vec![R::zero(); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for c in k + 1..n {
            s = s - a[k][c].clone() * x[c].clone();
        }
        x[k] = s / a[k][k].clone();
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimizes `cost . y` over the halfspaces by enumerating vertices. The
/// feasible set is assumed bounded (or to contain an optimal vertex).
fn lp_by_vertices<R: Real>(cost: &[R], hs: &[Halfspace<R>], ctx: &NumericContext<R>) -> Option<(R, Vec<R>)> {
    let n = cost.len();
    let mut best: Option<(R, Vec<R>)> = None;
    combinations(hs.len(), n, &mut |idx| {
        let a: Vec<Vec<R>> = idx.iter().map(|&i| hs[i].coeffs.clone()).collect();
        let b: Vec<R> = idx.iter().map(|&i| hs[i].rhs.clone()).collect();
        let Some(y) = solve_square(a, b) else { return };
        let feasible = hs.iter().all(|h| {
            let act = h.coeffs.iter().zip(&y).fold(R::zero(), |s, (c, v)| s + c.clone() * v.clone());
            ctx.is_feas_le(&act, &h.rhs)
        });
        if !feasible {
            return;
        }
        let v = cost.iter().zip(&y).fold(R::zero(), |s, (c, v)| s + c.clone() * v.clone());
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, y));
        }
    });
    best
}

/// Exact optimum of a small MIP: every integral assignment is enumerated and
/// the continuous rest is solved as an LP. Integral columns need finite bounds.
pub fn brute_force<R: Real>(p: &Problem<R>, ctx: &NumericContext<R>) -> Outcome<R> {
    let n = p.ncols();
    let ints: Vec<usize> = (0..n).filter(|&j| p.is_integral(j)).collect();
    let conts: Vec<usize> = (0..n).filter(|&j| !p.is_integral(j)).collect();
    let domains: Vec<Vec<R>> = ints
        .iter()
        .map(|&j| {
            let l = ctx.feas_ceil(p.lower[j].as_ref().expect("bounded integral column")).to_i64_exact().unwrap();
            let u = ctx.feas_floor(p.upper[j].as_ref().expect("bounded integral column")).to_i64_exact().unwrap();
            (l..=u).map(R::from_i64).collect()
        })
        .collect();
    if domains.iter().any(Vec::is_empty) {
        return Outcome::Infeasible;
    }
    let mut best: Option<(R, Vec<R>)> = None;
    let mut pick = vec![0usize; ints.len()];
    loop {
        let mut x = vec![R::zero(); n];
        for (k, &j) in ints.iter().enumerate() {
            x[j] = domains[k][pick[k]].clone();
        }
        if let Some(y) = solve_continuous(p, ctx, &conts, &x) {
            for (k, &j) in conts.iter().enumerate() {
                x[j] = y[k].clone();
            }
            let value = p.objective_value(&x);
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, x));
            }
        }
        let mut k = 0;
        loop {
            if k == ints.len() {
                return match best {
                    Some((value, x)) => Outcome::Optimal { value, x },
                    None => Outcome::Infeasible,
                };
            }
            pick[k] += 1;
            if pick[k] < domains[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// Values of the continuous columns completing `x` (integral part set) at
/// least cost.
fn solve_continuous<R: Real>(p: &Problem<R>, ctx: &NumericContext<R>, conts: &[usize], x: &[R]) -> Option<Vec<R>> {
    let pos: Vec<Option<usize>> = {
        let mut v = vec![None; p.ncols()];
        for (k, &j) in conts.iter().enumerate() {
            v[j] = Some(k);
        }
        v
    };
    let m = conts.len();
    let mut hs = Vec::new();
    for i in 0..p.nrows() {
        let mut coeffs = vec![R::zero(); m];
        let mut fixed = R::zero();
        for e in p.matrix.row(i) {
            match pos[e.index] {
                Some(k) => coeffs[k] = e.value.clone(),
                None => fixed = fixed + e.value.clone() * x[e.index].clone(),
            }
        }
        if let Some(r) = p.rhs(i) {
            hs.push(Halfspace { coeffs: coeffs.clone(), rhs: r.clone() - fixed.clone() });
        }
        if let Some(l) = p.lhs(i) {
            hs.push(Halfspace { coeffs: coeffs.iter().map(|c| -c.clone()).collect(), rhs: fixed - l.clone() });
        }
    }
    for (k, &j) in conts.iter().enumerate() {
        let unit = |s: R| {
            let mut c = vec![R::zero(); m];
            c[k] = s;
            c
        };
        if let Some(u) = &p.upper[j] {
            hs.push(Halfspace { coeffs: unit(R::one()), rhs: u.clone() });
        }
        if let Some(l) = &p.lower[j] {
            hs.push(Halfspace { coeffs: unit(-R::one()), rhs: -l.clone() });
        }
    }
    if m == 0 {
        return hs
            .iter()
            .all(|h| ctx.is_feas_le(&R::zero(), &h.rhs))
            .then(Vec::new);
    }
    let cost: Vec<R> = conts.iter().map(|&j| p.objective[j].clone()).collect();
    lp_by_vertices(&cost, &hs, ctx).map(|(_, y)| y)
}

/// Presolves `p` and checks the reduced problem against the oracle.
pub fn check_against_oracle<R: Real>(p: &Problem<R>, opts: &PresolveOptions, tol: f64) -> Result<(), String> {
    let ctx = opts.context::<R>().unwrap();
    let original = brute_force(p, &ctx);
    let res = presolve(p.clone(), opts, ctx.clone());
    match res.status {
        PresolveStatus::Infeasible => {
            return match original {
                Outcome::Infeasible => Ok(()),
                Outcome::Optimal { value, .. } => Err(format!("presolve says infeasible, optimum {value}")),
            }
        }
        PresolveStatus::Unbounded => return Err("presolve says unbounded on a bounded problem".into()),
        _ => {}
    }
    let reduced = brute_force(&res.reduced, &ctx);
    match (&original, &reduced) {
        (Outcome::Infeasible, Outcome::Infeasible) => Ok(()),
        (Outcome::Optimal { value: a, .. }, Outcome::Optimal { value: b, x }) => {
            if (a.to_f64() - b.to_f64()).abs() > tol {
                return Err(format!("optimum {a} became {b}"));
            }
            let sol = postsolve_primal(&res.record, x, &ctx).map_err(|e| format!("postsolve: {e}"))?;
            p.is_feasible(&sol.values, &ctx).map_err(|e| format!("postsolved point infeasible: {e}"))?;
            let obj = p.objective_value(&sol.values);
            if (obj.to_f64() - a.to_f64()).abs() > tol {
                return Err(format!("postsolved objective {obj} differs from optimum {a}"));
            }
            Ok(())
        }
        _ => Err(format!("status changed: {original:?} became {reduced:?}")),
    }
}

/// Shape of random instances.
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_int: usize,
    pub max_cont: usize,
    pub max_rows: usize,
    /// Largest number of values in an integral domain.
    pub max_domain: i64,
}

pub const SMALL_MIP: GenConfig = GenConfig { max_int: 8, max_cont: 0, max_rows: 6, max_domain: 3 };
pub const SMALL_MIXED: GenConfig = GenConfig { max_int: 5, max_cont: 3, max_rows: 5, max_domain: 3 };

/// Random MIP with small integer data. Some rows copy or scale others, and
/// some columns appear only once, so most presolvers have something to find.
pub fn random_mip(seed: u64, cfg: GenConfig) -> Problem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_int = rng.gen_range(1..=cfg.max_int);
    let n_cont = rng.gen_range(0..=cfg.max_cont);
    let n = n_int + n_cont;
    let mut b = ProblemBuilder::new();
    b.set_name(&format!("rand{seed}"));
    let mut point = Vec::new();
    for j in 0..n {
        let integral = j < n_int;
        let lo = rng.gen_range(-2..=1) as f64;
        let width = rng.gen_range(0..cfg.max_domain) as f64;
        let (lo, hi) = if rng.gen_bool(0.5) && integral { (0.0, 1.0) } else { (lo, lo + width.max(if integral { 0.0 } else { 1.0 })) };
        let cost = rng.gen_range(-4..=4) as f64;
        b.add_col(&format!("x{j}"), cost, Some(lo), Some(hi), integral);
        point.push(if integral { rng.gen_range(lo as i64..=hi as i64) as f64 } else { lo });
    }
    let m = rng.gen_range(0..=cfg.max_rows);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..m {
        let entries: Vec<(usize, f64)> = if i > 0 && rng.gen_bool(0.15) {
            let k = rng.gen_range(1..=3) as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            rows[rng.gen_range(0..rows.len())].iter().map(|&(j, a)| (j, a * k)).collect()
        } else {
            let len = rng.gen_range(1..=n.min(4));
            let mut cols: Vec<usize> = (0..n).collect();
            for s in 0..len {
                let t = rng.gen_range(s..n);
                cols.swap(s, t);
            }
            let mut cols = cols[..len].to_vec();
            cols.sort_unstable();
            cols.into_iter()
                .map(|j| {
                    let mut a = rng.gen_range(-5..=5) as f64;
                    if a == 0.0 {
                        a = 1.0;
                    }
                    (j, a)
                })
                .collect()
        };
        let act: f64 = entries.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = rng.gen_range(-1..=3) as f64;
        let (lhs, rhs) = match rng.gen_range(0..4) {
            0 => (None, Some(act + slack)),
            1 => (Some(act - slack), None),
            2 => (Some(act), Some(act)),
            _ => (Some(act - slack.abs() - 1.0), Some(act + slack)),
        };
        b.add_row(&format!("r{i}"), &entries, lhs, rhs);
        rows.push(entries);
    }
    b.build()
}

/// Larger random MIP with `nrows` rows over `ncols` columns, feasible at a
/// hidden point: set packing, knapsack and implication rows over binaries,
/// equations linking continuous columns, and scaled copies of earlier rows.
pub fn random_large(seed: u64, nrows: usize, ncols: usize) -> Problem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ProblemBuilder::new();
    b.set_name(&format!("large{seed}"));
    let mut point = Vec::with_capacity(ncols);
    let mut binaries = Vec::new();
    let mut others = Vec::new();
    for j in 0..ncols {
        let cost = rng.gen_range(-9..=9) as f64;
        match rng.gen_range(0..10) {
            0..=5 => {
                b.add_col(&format!("b{j}"), cost, Some(0.0), Some(1.0), true);
                point.push(rng.gen_range(0..=1) as f64);
                binaries.push(j);
            }
            6 | 7 => {
                b.add_col(&format!("i{j}"), cost, Some(0.0), Some(10.0), true);
                point.push(rng.gen_range(0..=10) as f64);
                others.push(j);
            }
            _ => {
                let upper = if rng.gen_bool(0.3) { None } else { Some(100.0) };
                let cost = if upper.is_none() { cost.abs() } else { cost };
                b.add_col(&format!("c{j}"), cost, Some(0.0), upper, false);
                point.push(rng.gen_range(0..=20) as f64);
                others.push(j);
            }
        }
    }
    let pick = |rng: &mut ChaCha8Rng, pool: &[usize], len: usize| -> Vec<usize> {
        let mut cols: Vec<usize> = (0..len.min(pool.len())).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    };
    let all: Vec<usize> = (0..ncols).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..nrows {
        let kind = rng.gen_range(0..10);
        let entries: Vec<(usize, f64)> = match kind {
            0 if !rows.is_empty() => {
                let k = rng.gen_range(1..=4) as f64;
                rows[rng.gen_range(0..rows.len())].iter().map(|&(j, a)| (j, a * k)).collect()
            }
            1 | 2 if binaries.len() >= 2 => {
                let cols = pick(&mut rng, &binaries, 2);
                match cols[..] {
                    [u, v] => vec![(u, 1.0), (v, -1.0)],
                    _ => vec![(cols[0], 1.0)],
                }
            }
            3 | 4 if !binaries.is_empty() => {
                let len = rng.gen_range(2..=6);
                pick(&mut rng, &binaries, len).into_iter().map(|j| (j, 1.0)).collect()
            }
            _ => {
                let len = rng.gen_range(1..=6);
                pick(&mut rng, &all, len)
                    .into_iter()
                    .map(|j| {
                        let a = rng.gen_range(1..=9) as f64;
                        (j, if rng.gen_bool(0.3) { -a } else { a })
                    })
                    .collect()
            }
        };
        if entries.is_empty() {
            continue;
        }
        let act: f64 = entries.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = rng.gen_range(0..=4) as f64;
        let (lhs, rhs) = match rng.gen_range(0..6) {
            0 | 1 => (None, Some(act + slack)),
            2 => (Some(act - slack), None),
            3 => (Some(act), Some(act)),
            _ => (Some(act - slack), Some(act + slack)),
        };
        b.add_row(&format!("r{i}"), &entries, lhs, rhs);
        rows.push(entries);
    }
    b.build()
}

/// Probing-heavy instance: `n` binaries in implication chains `x_i <= x_j`,
/// set packing rows, some of them inside a chain, and a few knapsacks.
pub fn implication_chains(seed: u64, n: usize) -> Problem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ProblemBuilder::new();
    b.set_name(&format!("chains{seed}"));
    for j in 0..n {
        b.add_col(&format!("x{j}"), -(rng.gen_range(1..=9) as f64), Some(0.0), Some(1.0), true);
    }
    let chain = 8;
    let mut r = 0;
    for start in (0..n).step_by(chain) {
        for j in start..(start + chain - 1).min(n - 1) {
            b.add_row(&format!("r{r}"), &[(j + 1, 1.0), (j, -1.0)], None, Some(0.0));
            r += 1;
        }
    }
    for k in 0..n / 4 {
        let u = rng.gen_range(0..n);
        let v = if k % 8 == 0 { (u / chain) * chain + chain - 1 } else { rng.gen_range(0..n) };
        if u != v && v < n {
            b.add_row(&format!("r{r}"), &[(u.min(v), 1.0), (u.max(v), 1.0)], None, Some(1.0));
            r += 1;
        }
    }
    for _ in 0..n / 50 {
        let mut cols: Vec<usize> = (0..12).map(|_| rng.gen_range(0..n)).collect();
        cols.sort_unstable();
        cols.dedup();
        let entries: Vec<(usize, f64)> = cols.iter().map(|&j| (j, rng.gen_range(2..=9) as f64)).collect();
        let cap = entries.iter().map(|e| e.1).sum::<f64>() / 2.0;
        b.add_row(&format!("r{r}"), &entries, None, Some(cap.floor()));
        r += 1;
    }
    b.build()
}
