use hetsched::simplex::{solve, to_basic, LinearProgram, LpStatus, Relation};
use proptest::prelude::*;

/// Best objective over all vertices of a box-bounded LP, found by solving
/// every n x n system drawn from the row hyperplanes and bound faces.
fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut faces: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] += v;
        }
        faces.push((a, c.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        faces.push((e.clone(), lp.lower[j]));
        faces.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn rec(
        k: usize,
        start: usize,
        pick: &mut Vec<usize>,
        faces: &[(Vec<f64>, f64)],
        lp: &LinearProgram,
        best: &mut Option<f64>,
    ) {
        let n = pick.len();
        if k == n {
            let mut a: Vec<Vec<f64>> = pick.iter().map(|&f| faces[f].0.clone()).collect();
            let mut b: Vec<f64> = pick.iter().map(|&f| faces[f].1).collect();
            if let Some(x) = gauss(&mut a, &mut b) {
                if lp.max_violation(&x) < 1e-9 {
                    let v = lp.objective_value(&x);
                    if best.map_or(true, |b| v < b) {
                        *best = Some(v);
                    }
                }
            }
            return;
        }
        for f in start..faces.len() {
            pick[k] = f;
            rec(k + 1, f + 1, pick, faces, lp, best);
        }
    }
    rec(0, 0, &mut pick, &faces, lp, &mut best);
    best
}

fn gauss(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
        if a[p][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    Some((0..n).map(|k| b[k] / a[k][k]).collect())
}

fn relation(code: u8) -> Relation {
    match code % 3 {
        0 => Relation::Le,
        1 => Relation::Ge,
        _ => Relation::Eq,
    }
}

prop_compose! {
    fn small_lp()(n in 1usize..=5, m in 0usize..=3)
        (costs in prop::collection::vec(-5i32..=5, n),
         uppers in prop::collection::vec(1i32..=4, n),
         rows in prop::collection::vec((prop::collection::vec(-3i32..=3, n), any::<u8>(), -4i32..=8), m))
        -> LinearProgram
    {
        let mut lp = LinearProgram::new();
        for (c, u) in costs.iter().zip(&uppers) {
            lp.add_variable(0.0, f64::from(*u), f64::from(*c));
        }
        for (a, rel, b) in rows {
            let coeffs = a.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, f64::from(*v))).collect();
            lp.add_constraint(coeffs, relation(rel), f64::from(b));
        }
        lp
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in small_lp()) {
        let sol = solve(&lp).unwrap();
        match vertex_enumeration(&lp) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - best).abs() < 1e-8, "{} vs {}", sol.objective, best);
                prop_assert!(lp.max_violation(&sol.values) < 1e-9);
                prop_assert!(sol.interior_count(&lp) <= lp.num_rows());
            }
        }
    }

    #[test]
    fn to_basic_never_worsens(lp in small_lp(), weights in prop::collection::vec(0.0f64..1.0, 3)) {
        // feasible interior-ish point: convex combination of optimal
        // solutions under a few perturbed objectives
        let base = solve(&lp).unwrap();
        prop_assume!(base.status == LpStatus::Optimal);
        let mut points = vec![base.values.clone()];
        for sign in [-1.0, 1.0] {
            let mut alt = lp.clone();
            alt.objective.iter_mut().enumerate().for_each(|(j, c)| *c = sign * (j as f64 + 1.0));
            let s = solve(&alt).unwrap();
            points.push(s.values);
        }
        let total: f64 = weights.iter().sum::<f64>() + 1e-3;
        let x: Vec<f64> = (0..lp.num_vars())
            .map(|j| points.iter().zip(&weights).map(|(p, w)| p[j] * (w + 1e-3 / 3.0)).sum::<f64>() / total)
            .collect();
        let v = to_basic(&lp, &x).unwrap();
        prop_assert!(lp.max_violation(&v) < 1e-8);
        prop_assert!(lp.objective_value(&v) <= lp.objective_value(&x) + 1e-9);
        let interior = (0..lp.num_vars())
            .filter(|&j| v[j] > lp.lower[j] + 1e-9 && v[j] < lp.upper[j] - 1e-9)
            .count();
        prop_assert!(interior <= lp.num_rows());
    }
}
