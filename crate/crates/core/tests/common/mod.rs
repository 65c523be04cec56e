//! Seeded invariant checks shared by the property tests and the acceptance
//! suite. Each returns `Err(description)` on the first violation.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use sublex::credal::TOL;
use sublex::distribution::{
    approximate_event, build_iid_model, check_identical, check_independence,
    check_independent_of_filtration, TestFunctionBattery,
};
use sublex::inequality::{doob_martingale, doob_submartingale_max, doob_submartingale_min, kolmogorov_inequality};
use sublex::integrability::{convex_hull_check, dominated_convergence_check, seminorm, ui_check, Exponent};
use sublex::lln::borel_cantelli_bound;
use sublex::martingale::{
    classify_process, jensen_transform_check, optional_sampling_check, partial_sum_process, ConvexFn,
    ProcessKind,
};
use sublex::testing::*;
use sublex::{CredalModel, Event, RandomVariable, StoppingTime};

pub type Check = Result<(), String>;

fn close(what: &str, a: f64, b: f64, tol: f64) -> Check {
    if (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b}"))
    }
}

fn le(what: &str, a: f64, b: f64, tol: f64) -> Check {
    if a <= b + tol * (1.0 + b.abs()) {
        Ok(())
    } else {
        Err(format!("{what}: {a} > {b}"))
    }
}

fn ensure(what: &str, ok: bool) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn model(seed: u64) -> (rand_chacha::ChaCha8Rng, CredalModel) {
    let mut r = rng(seed);
    let m = random_model(&mut r, &ModelShape::default());
    (r, m)
}

/// Backward induction against the maximum over all pure strategies.
pub fn oracle_equivalence(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let x = random_variable(&mut r, m.space(), 5.0);
    let dp = m.upper_expectation(&x);
    let measures = m.enumerate_measures().map_err(|e| e.to_string())?;
    let mut best = f64::NEG_INFINITY;
    for p in &measures {
        let v = p.expectation(&x);
        le("E_theta <= E", v, dp, TOL)?;
        best = best.max(v);
    }
    close("max over strategies", best, dp, TOL)?;
    let arg = m.maximizing_strategy(&x).expectation(&x);
    close("maximizing strategy", arg, dp, TOL)
}

/// Definition 2.1, conjugate dominance, capacity duality and continuity.
pub fn axioms(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let sp = m.space();
    let x = random_variable(&mut r, sp, 5.0);
    let y = random_variable(&mut r, sp, 5.0);
    let bump = random_variable(&mut r, sp, 2.0).abs();
    let c = random_value(&mut r, 5.0);
    let lambda = r.gen_range(0.0..4.0);
    let ex = m.upper_expectation(&x);
    le("monotonicity", ex, m.upper_expectation(&(&x + &bump)), TOL)?;
    close("constant", m.upper_expectation(&RandomVariable::constant(sp, c)), c, TOL)?;
    le("sub-additivity", m.upper_expectation(&(&x + &y)), ex + m.upper_expectation(&y), TOL)?;
    close("homogeneity", m.upper_expectation(&(&x * lambda)), lambda * ex, TOL)?;
    close("translation", m.upper_expectation(&(&x + c)), ex + c, TOL)?;
    le("conjugate", m.conjugate_expectation(&x), ex, TOL)?;

    let a = random_event(&mut r, sp);
    let dual = m.capacity(&a) + m.lower_capacity(&a.complement());
    if (dual - 1.0).abs() > 1e-12 {
        return Err(format!("capacity duality: {dual}"));
    }
    // nested chains: grow by one leaf at a time, and shrink back
    let mut order: Vec<usize> = (0..sp.leaf_count()).collect();
    order.shuffle(&mut r);
    let mut members = vec![false; sp.leaf_count()];
    let mut prev = 0.0;
    let mut chain = Vec::new();
    for &leaf in &order {
        members[leaf] = true;
        let v = m.capacity(&Event::new(sp, members.clone()).unwrap());
        le("increasing chain", prev, v, TOL)?;
        prev = v;
        chain.push(v);
    }
    close("limit of increasing chain", prev, 1.0, TOL)?;
    for w in chain.windows(2).rev() {
        le("decreasing chain", w[0], w[1], TOL)?;
    }
    Ok(())
}

/// Definition 2.6 (i)-(vi), tower, translation, Lemma 3.2, Jensen.
pub fn conditional(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let sp = m.space();
    let d = sp.depth();
    let t = r.gen_range(0..=d);
    let s = r.gen_range(0..=t);
    let x = random_variable(&mut r, sp, 5.0);
    let y = random_variable(&mut r, sp, 5.0);
    let bump = random_variable(&mut r, sp, 2.0).abs();
    let cond = |v: &RandomVariable| m.conditional_variable(v, t).unwrap();
    let ct_x = cond(&x);
    let ct_y = cond(&y);
    let support = m.qs_support();
    let each = |what: &str, a: &RandomVariable, b: &RandomVariable, eq: bool| -> Check {
        for leaf in (0..sp.leaf_count()).filter(|&l| support[l]) {
            if eq {
                close(what, a.get(leaf), b.get(leaf), TOL)?;
            } else {
                le(what, a.get(leaf), b.get(leaf), TOL)?;
            }
        }
        Ok(())
    };
    each("(i) monotone", &ct_x, &cond(&(&x + &bump)), false)?;
    let tower = m.conditional_variable(&ct_x, s).unwrap();
    each("(ii) tower", &tower, &m.conditional_variable(&x, s).unwrap(), true)?;
    let a = random_measurable_event(&mut r, sp, t);
    let ind = a.indicator();
    each("(iii) locality", &cond(&(&ind * &y)), &(&ind * &ct_y), true)?;
    let z = random_measurable(&mut r, sp, t, 5.0);
    each("(iv) measurable", &cond(&z), &z, true)?;
    each("(v) sub-additive", &cond(&(&x + &y)), &(&ct_x + &ct_y), false)?;
    let lam = random_measurable(&mut r, sp, t, 3.0);
    let rhs = &(&lam.positive_part() * &ct_y) + &(&lam.negative_part() * &cond(&-&y));
    each("(vi) homogeneity", &cond(&(&lam * &y)), &rhs, true)?;
    each("translation", &cond(&(&z + &y)), &(&z + &ct_y), true)?;
    // (vii) on an eventually-zero decreasing sequence
    let pos = x.positive_part();
    let mut prev = cond(&pos);
    for k in 2..=4 {
        let next = cond(&(&pos * (1.0 / k as f64)));
        each("(vii) decreasing", &next, &prev, false)?;
        prev = next;
    }
    each("(vii) limit", &cond(&(&pos * 0.0)), &RandomVariable::constant(sp, 0.0), true)?;

    // Lemma 3.2: A in F_T, and S <= T <= S + 1
    let tau = random_stopping_time(&mut r, sp);
    let chosen: Vec<usize> = tau.nodes().iter().copied().filter(|_| r.gen_bool(0.5)).collect();
    let a_t = Event::from_nodes(sp, &chosen).indicator();
    each(
        "lemma 3.2 locality",
        &m.conditional_at_stopping(&(&a_t * &x), &tau),
        &(&a_t * &m.conditional_at_stopping(&x, &tau)),
        true,
    )?;
    let mut next_nodes = Vec::new();
    for &n in tau.nodes() {
        if !sp.is_leaf(n) && r.gen_bool(0.5) {
            next_nodes.extend(sp.children(n));
        } else {
            next_nodes.push(n);
        }
    }
    let tau1 = StoppingTime::from_antichain(sp, &next_nodes).unwrap();
    each(
        "lemma 3.2 tower",
        &m.conditional_at_stopping(&m.conditional_at_stopping(&x, &tau1), &tau),
        &m.conditional_at_stopping(&x, &tau),
        true,
    )?;
    for phi in ConvexFn::battery() {
        let rep = jensen_transform_check(&m, &x, t, phi).map_err(|e| e.to_string())?;
        ensure(&format!("jensen {} slack {}", phi.name(), rep.min_slack), rep.holds)?;
    }
    Ok(())
}

fn positive_level<R: Rng>(r: &mut R, values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let median = v[v.len() / 2];
    if median > 0.0 {
        median
    } else {
        r.gen_range(0.1..3.0)
    }
}

/// Theorem 3.1 (i) and (ii) on a generated submartingale.
pub fn doob_submartingale(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let x = random_submartingale(&mut r, &m);
    ensure("generator gives a submartingale", classify_process(&m, &x).kind.is_submartingale())?;
    let sp = m.space();
    let first = x.start().max(1);
    let maxes: Vec<f64> = (0..sp.leaf_count())
        .map(|leaf| {
            (first..=x.end())
                .map(|j| x.value(sp, j, sp.ancestor_at(leaf, j)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let lambda = positive_level(&mut r, &maxes);
    let rep = doob_submartingale_max(&m, &x, lambda).map_err(|e| e.to_string())?;
    ensure(&format!("doob max {:?}", rep.values()), rep.verdict)?;
    let rep = doob_submartingale_min(&m, &x, lambda).map_err(|e| e.to_string())?;
    ensure(&format!("doob min {:?}", rep.values()), rep.verdict)
}

/// Corollary c1 (i) and (ii) on a generated martingale.
pub fn doob_mart(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let x = random_martingale(&mut r, &m);
    ensure("tower process is a martingale", classify_process(&m, &x).kind == ProcessKind::Martingale)?;
    let lambda = r.gen_range(0.1..5.0);
    let rep = doob_martingale(&m, &x, lambda).map_err(|e| e.to_string())?;
    ensure(&format!("corollary {:?}", rep.values()), rep.verdict)
}

/// Theorem 2.20 on a random (submartingale, S <= T) pair; returns the slack.
pub fn optional_sampling(seed: u64) -> Result<f64, String> {
    let (mut r, m) = model(seed);
    let x = if r.gen_bool(0.5) {
        drift_submartingale(&mut r, &m)
    } else {
        convex_submartingale(&mut r, &m)
    };
    let (s, t) = random_stopping_pair(&mut r, m.space());
    let rep = optional_sampling_check(&m, &x, &s, &t).map_err(|e| e.to_string())?;
    ensure(&format!("optional sampling slack {}", rep.min_slack), rep.holds)?;
    Ok(rep.min_slack)
}

/// Kolmogorov bound-1 on a random IID model.
pub fn kolmogorov_iid(seed: u64) -> Check {
    let mut r = rng(seed);
    let t = random_template(&mut r);
    let n = r.gen_range(1..=3);
    let iid = build_iid_model(&t, n).map_err(|e| e.to_string())?;
    let eps = r.gen_range(0.1..(2.0 * n as f64 * t.max_abs()).max(0.2));
    let rep = kolmogorov_inequality(&iid.model, &iid.steps, eps, None).map_err(|e| e.to_string())?;
    let b1 = rep.bound_named("bound-1").unwrap();
    ensure(&format!("bound-1 {} > {}", b1.lhs, b1.rhs), b1.holds)
}

/// Bound-2, cross terms and the variance identity on a mean-certain IID model.
pub fn kolmogorov_mean_certain(seed: u64) -> Check {
    let mut r = rng(seed);
    let t = random_mean_certain_template(&mut r);
    let n = r.gen_range(2..=3);
    let iid = build_iid_model(&t, n).map_err(|e| e.to_string())?;
    let eps = r.gen_range(0.1..2.0 * n as f64 * t.max_abs());
    let rep = kolmogorov_inequality(&iid.model, &iid.steps, eps, None).map_err(|e| e.to_string())?;
    let b2 = rep.bound_named("bound-2").unwrap();
    ensure("bound-2 enforced", !b2.diagnostic)?;
    ensure(&format!("bound-2 {} > {}", b2.lhs, b2.rhs), b2.holds && rep.verdict)?;
    for (k, v) in &rep.extras {
        if k.contains("Xbar_") && k.contains('*') {
            close(k, *v, 0.0, TOL)?;
        }
    }
    close("E(S_n^2) = sum", rep.extras["E(S_n^2)"], rep.extras["sum E(Xbar_i^2)"], TOL)
}

/// IID constructions pass the batteries, and Lemma 4.3 holds.
pub fn distribution(seed: u64) -> Check {
    let mut r = rng(seed);
    let t = random_template(&mut r);
    let n = r.gen_range(2..=3);
    let iid = build_iid_model(&t, n).map_err(|e| e.to_string())?;
    let m = &iid.model;
    let battery = TestFunctionBattery::for_values(1, t.outcomes());
    for i in 1..n {
        let y = &iid.steps[i];
        let rep = check_independence(m, &iid.steps[..i], y, &TestFunctionBattery::for_values(i, t.outcomes()))
            .map_err(|e| e.to_string())?;
        ensure(&format!("independence at {i}: {:?}", rep.witness), rep.pass)?;
        let rep = check_independence(m, &iid.steps[i - 1..i], y, &battery).map_err(|e| e.to_string())?;
        ensure(&format!("adjacent independence at {i}: {:?}", rep.witness), rep.pass)?;
        let rep = check_identical(m, &iid.steps[i - 1], m, y, &battery).map_err(|e| e.to_string())?;
        ensure(&format!("identical at {i}: {:?}", rep.witness), rep.pass)?;
        let rep = check_independent_of_filtration(m, y, i, &battery).map_err(|e| e.to_string())?;
        ensure(&format!("lemma 4.3 at {i}: {}", rep.max_deviation), rep.lemma_pass)?;
    }
    let sum = &iid.steps[0] + &iid.steps[1];
    close(
        "additivity",
        m.upper_expectation(&sum),
        m.upper_expectation(&iid.steps[0]) + m.upper_expectation(&iid.steps[1]),
        TOL,
    )
}

/// Lemma 4.3 on its own: `E_n(X_{n+1}) = E(X_{n+1})` q.s.
pub fn lemma_4_3(seed: u64) -> Check {
    let mut r = rng(seed);
    let t = random_template(&mut r);
    let depth = r.gen_range(2..=4);
    let iid = build_iid_model(&t, depth).map_err(|e| e.to_string())?;
    let n = r.gen_range(1..depth);
    let x = &iid.steps[n];
    let cond = iid.model.conditional_variable(x, n).map_err(|e| e.to_string())?;
    let e = iid.model.upper_expectation(x);
    let support = iid.model.qs_support();
    for leaf in (0..support.len()).filter(|&l| support[l]) {
        close("E_n(X) = E(X)", cond.get(leaf), e, TOL)?;
    }
    Ok(())
}

/// Theorem 2.13 equivalence and Corollary 2.14 on a random finite family.
pub fn uniform_integrability(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let k = r.gen_range(1..=4);
    let family: Vec<RandomVariable> = (0..k).map(|_| random_variable(&mut r, m.space(), 5.0)).collect();
    let rep = ui_check(&m, &family).map_err(|e| e.to_string())?;
    let bounded = rep.bound.is_finite();
    let table = rep.table.iter().all(|row| row.pass);
    ensure("theorem 2.13 equivalence", rep.uniformly_integrable == (bounded && table))?;
    ensure("finite family is u.i.", rep.uniformly_integrable && rep.curve_nonincreasing)?;
    let mut w: Vec<f64> = (0..k).map(|_| r.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let fix: f64 = w[..k - 1].iter().sum();
    w[k - 1] = (1.0 - fix).max(0.0);
    let hull = convex_hull_check(&m, &family, &w).map_err(|e| e.to_string())?;
    ensure("corollary 2.14", hull.holds && hull.mixture.uniformly_integrable)
}

/// Seminorm homogeneity, triangle inequality and monotonicity in p.
pub fn seminorms(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let x = random_variable(&mut r, m.space(), 5.0);
    let y = random_variable(&mut r, m.space(), 5.0);
    let a = random_value(&mut r, 4.0);
    let ps = [Exponent::new(1.0).unwrap(), Exponent::new(2.0).unwrap(), Exponent::Infinity];
    let mut prev = 0.0;
    for p in ps {
        let nx = seminorm(&m, &x, p);
        close(&format!("homogeneity p={p}"), seminorm(&m, &(&x * a), p), a.abs() * nx, TOL)?;
        le(&format!("triangle p={p}"), seminorm(&m, &(&x + &y), p), nx + seminorm(&m, &y, p), TOL)?;
        le(&format!("monotone in p={p}"), prev, nx, TOL)?;
        prev = nx;
    }
    Ok(())
}

/// `X_n = X(1 − 2^{-n})` dominated by `|X|`: returns the last error.
pub fn dominated(seed: u64) -> Result<f64, String> {
    let (mut r, m) = model(seed);
    let x = random_variable(&mut r, m.space(), 5.0);
    let xs: Vec<RandomVariable> = (1..=40).map(|n| &x * (1.0 - 0.5f64.powi(n))).collect();
    let rep = dominated_convergence_check(&m, &xs, &x, &x.abs(), 1e-6).map_err(|e| e.to_string())?;
    let last = *rep.l1_errors.last().unwrap();
    ensure(&format!("dominated convergence: {last}"), rep.converged && rep.bound_ok && last < 1e-6)?;
    Ok(last)
}

/// `V(B_n △ B) <= μ(B_n △ B)` for a random event and level.
pub fn event_approximation(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let b = random_event(&mut r, m.space());
    let n = r.gen_range(0..=m.space().depth());
    let rep = approximate_event(&m, &b, n).map_err(|e| e.to_string())?;
    ensure(
        &format!("V = {} > mu = {}", rep.capacity_error, rep.mu_error),
        rep.bound_holds && rep.capacity_error <= rep.mu_error + TOL,
    )
}

/// Sub-additivity over a random event family and all of its tails.
pub fn borel_cantelli(seed: u64) -> Check {
    let (mut r, m) = model(seed);
    let fam = random_event_family(&mut r, m.space(), 6);
    let rep = borel_cantelli_bound(&m, &fam).map_err(|e| e.to_string())?;
    ensure("borel-cantelli", rep.holds)?;
    for (_, u, s) in &rep.tails {
        le("tail", *u, *s, TOL)?;
    }
    Ok(())
}

/// Centred partial sums of a mean-certain IID model form a martingale.
pub fn centred_sums_martingale(seed: u64) -> Check {
    let mut r = rng(seed);
    let t = random_mean_certain_template(&mut r);
    let iid = build_iid_model(&t, r.gen_range(1..=3)).map_err(|e| e.to_string())?;
    let s = partial_sum_process(&iid.model, &iid.steps).map_err(|e| e.to_string())?;
    let class = classify_process(&iid.model, &s);
    ensure(&format!("centred sums: {}", class.kind), class.kind == ProcessKind::Martingale)?;
    let sq = s.map(|v| v * v);
    ensure("convex image", classify_process(&iid.model, &sq).kind.is_submartingale())
}
