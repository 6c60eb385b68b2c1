//! A tiny dense two-phase simplex solver over exact rationals.
//!
//! Solves `maximize c·x subject to A x = b, x ≥ 0`. Bland's rule is used for
//! both the entering and leaving variable, which guarantees termination
//! without any perturbation tricks — essential here because every pivot is
//! exact and the instances are adversarially degenerate (lots of zeros).
//!
//! The problems fed to this solver are very small (a handful of states and
//! assets), so no effort is spent on sparsity or revised-form updates.

use crate::rat::Rat;

#[derive(Debug, Clone)]
pub struct Lp {
    /// Constraint matrix, row-major, m x n.
    pub a: Vec<Vec<Rat>>,
    /// Right-hand side, length m (any sign; rows are normalized internally).
    pub b: Vec<Rat>,
    /// Objective coefficients, length n (maximized).
    pub c: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, solution: Vec<Rat> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// m rows of n+1 entries; the last entry of each row is the rhs.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    /// Reduced cost of column j under objective `c` (length ≥ n).
    fn reduced_cost(&self, c: &[Rat], j: usize) -> Rat {
        let mut z = c[j].clone();
        for (row, &bi) in self.rows.iter().zip(&self.basis) {
            if !c[bi].is_zero() && !row[j].is_zero() {
                z -= &(&c[bi] * &row[j]);
            }
        }
        z
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let factor = self.rows[i][j].clone();
            for k in 0..=self.n {
                let delta = &factor * &self.rows[r][k];
                self.rows[i][k] -= &delta;
            }
        }
        self.basis[r] = j;
    }

    /// Runs Bland-rule simplex for objective `c` over the allowed columns.
    /// Returns false if the problem is unbounded in that direction.
    fn optimize(&mut self, c: &[Rat], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.n)
                .find(|&j| allowed[j] && self.reduced_cost(c, j).is_positive());
            let j = match entering {
                Some(j) => j,
                None => return true,
            };
            // Ratio test; ties broken by smallest basis variable (Bland).
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[self.n] / &row[j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    fn solution(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.n];
        for (row, &bi) in self.rows.iter().zip(&self.basis) {
            x[bi] = row[self.n].clone();
        }
        x
    }
}

pub fn solve(lp: &Lp) -> LpOutcome {
    let m = lp.a.len();
    let n = lp.c.len();
    debug_assert!(lp.a.iter().all(|row| row.len() == n));
    debug_assert_eq!(lp.b.len(), m);

    // Phase 1 tableau: original columns plus one artificial per row.
    let total = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rat> = Vec::with_capacity(total + 1);
        let flip = lp.b[i].is_negative();
        for j in 0..n {
            row.push(if flip { -&lp.a[i][j] } else { lp.a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rat::one() } else { Rat::zero() });
        }
        row.push(if flip { -&lp.b[i] } else { lp.b[i].clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..total).collect(),
        n: total,
    };

    let mut phase1_c = vec![Rat::zero(); total];
    for cj in phase1_c.iter_mut().skip(n) {
        *cj = -Rat::one();
    }
    let allowed_all = vec![true; total];
    // Maximizing the negated artificial sum is bounded above by 0.
    assert!(t.optimize(&phase1_c, &allowed_all), "phase 1 cannot be unbounded");
    let infeas: Rat = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &bi)| bi >= n)
        .map(|(row, _)| row[total].clone())
        .sum();
    if !infeas.is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive any degenerate artificial out of the basis, or drop its row.
    let mut drop_rows = Vec::new();
    for r in 0..t.rows.len() {
        if t.basis[r] < n {
            continue;
        }
        match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
            Some(j) => t.pivot(r, j),
            None => drop_rows.push(r),
        }
    }
    for &r in drop_rows.iter().rev() {
        t.rows.remove(r);
        t.basis.remove(r);
    }

    // Phase 2: artificial columns are frozen out.
    let mut phase2_c = lp.c.clone();
    phase2_c.extend(std::iter::repeat(Rat::zero()).take(m));
    let mut allowed = vec![true; total];
    for a in allowed.iter_mut().skip(n) {
        *a = false;
    }
    if !t.optimize(&phase2_c, &allowed) {
        return LpOutcome::Unbounded;
    }
    let full = t.solution();
    let solution: Vec<Rat> = full[..n].to_vec();
    let value = crate::rat::dot(&lp.c, &solution);
    LpOutcome::Optimal { value, solution }
}
