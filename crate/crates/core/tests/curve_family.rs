//! Brute-force check of the curve family over k[t]/(t^c): every member contains t^c k[[t]], so
//! a module is determined by its image V there, and u M = M' exactly when u V = V'. The u with
//! u V inside V' form a linear space; M and M' are isomorphic when it holds a unit.

use mflab_core::experiments::{bt_family_report, pullback_family};
use mflab_core::rings::MonomialCurveRing;
use mflab_core::{Context, Field};

const P: u64 = 101;

/// Reduced row echelon form over F_P with the pivot columns.
fn rref(mut rows: Vec<Vec<u64>>, ncols: usize) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = pow(rows[r][c], P - 2);
        for v in rows[r].iter_mut() {
            *v = *v * inv % P;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..ncols {
                    rows[i][j] = (rows[i][j] + P * P - f * rows[r][j]) % P;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

fn rank(rows: Vec<Vec<u64>>) -> usize {
    let n = rows.first().map_or(0, |r| r.len());
    rref(rows, n).1.len()
}

/// Basis of {x : rows . x = 0}.
fn nullspace(rows: Vec<Vec<u64>>, ncols: usize) -> Vec<Vec<u64>> {
    let (red, pivots) = rref(rows, ncols);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![0; ncols];
            x[free] = 1;
            for (row, &pc) in red.iter().zip(&pivots) {
                x[pc] = (P - row[free]) % P;
            }
            x
        })
        .collect()
}

/// Whether some unit u of k[t]/(t^c) has u V inside V'.
fn unit_carries(v: &[Vec<u64>], v2: &[Vec<u64>], c: usize) -> bool {
    // functionals vanishing on V'
    let dual = nullspace(v2.to_vec(), c);
    let mut eqs = Vec::new();
    for w in v {
        for l in &dual {
            eqs.push(
                (0..c)
                    .map(|i| shift(w, i).iter().zip(l).map(|(a, b)| a * b % P).sum::<u64>() % P)
                    .collect(),
            );
        }
    }
    nullspace(eqs, c).iter().any(|u| u[0] != 0)
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

fn shift(v: &[u64], s: usize) -> Vec<u64> {
    let mut out = vec![0; v.len()];
    out[s..].copy_from_slice(&v[..v.len() - s]);
    out
}

/// Spanning set of V_tau = R<1, t + tau t^2> mod t^c.
fn span(tau: u64, semigroup: &dyn Fn(usize) -> bool, c: usize) -> Vec<Vec<u64>> {
    let mut one = vec![0; c];
    one[0] = 1;
    let mut g = vec![0; c];
    g[1] = 1;
    g[2] = tau % P;
    (0..c)
        .filter(|&s| semigroup(s))
        .flat_map(|s| [shift(&one, s), shift(&g, s)])
        .collect()
}

fn same_space(a: &[Vec<u64>], b: &[Vec<u64>]) -> bool {
    let ra = rank(a.to_vec());
    let all: Vec<Vec<u64>> = a.iter().chain(b).cloned().collect();
    ra == rank(b.to_vec()) && rank(all) == ra
}

#[test]
fn family_members_are_distinct_but_isomorphic() {
    let (a, b) = (3usize, 7usize);
    let c = (a - 1) * (b - 1);
    let in_s = |n: usize| (0..=n / a).any(|i| (n - i * a).is_multiple_of(b));
    let taus: Vec<u64> = (1..=10).collect();
    for &s in &taus {
        for &s2 in &taus {
            if s == s2 {
                continue;
            }
            let (v, v2) = (span(s, &in_s, c), span(s2, &in_s, c));
            assert!(!same_space(&v, &v2), "V_{s} = V_{s2} as sets");
            assert!(unit_carries(&v, &v2, c), "no unit carries V_{s} to V_{s2}");
        }
    }
}

#[test]
fn engine_agrees_with_unit_oracle() {
    let curve = MonomialCurveRing::new(Field::fp(P).unwrap(), &[3, 7], 40).unwrap();
    assert_eq!(curve.conductor(), 12);
    let fam = pullback_family(&curve, &[1, 2, 3, 4]).unwrap();
    assert_eq!(fam.len(), 4);
    assert!(fam.iter().all(|m| m.contains_conductor()));
    let rep = bt_family_report(&curve, &[1, 2, 3, 4], &Context::new(40, 42)).unwrap();
    assert_eq!(rep.summary["isomorphic_pairs"], 6);
}
