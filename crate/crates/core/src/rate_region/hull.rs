//! Membership in `conv(points) + R^3_+` as a linear feasibility problem.
//!
//! Find `lambda >= 0`, `sum lambda = 1`, `sum lambda_i p_i <= b`. Solved by a
//! phase-one simplex over a dense tableau: four constraint rows, one column
//! per point plus three slacks and four artificials.

const PIVOT_EPS: f64 = 1e-12;
const FEASIBILITY_EPS: f64 = 1e-9;

/// True iff `bound` dominates some convex combination of `points`.
pub fn dominates_convex_combination(points: &[[f64; 3]], bound: [f64; 3]) -> bool {
    if points.is_empty() {
        return false;
    }
    if points
        .iter()
        .any(|p| (0..3).all(|j| p[j] <= bound[j]))
    {
        return true;
    }
    phase_one_objective(points, bound) <= FEASIBILITY_EPS
}

struct Tableau {
    rows: usize,
    cols: usize,
    // `rows` constraint rows followed by the reduced-cost row; the last
    // column of each row is the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let pv = self.at(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] /= pv;
        }
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.data[r * w + pc];
            if factor == 0.0 {
                continue;
            }
            for c in 0..w {
                self.data[r * w + c] -= factor * self.data[pr * w + c];
            }
        }
        self.basis[pr] = pc;
    }
}

fn phase_one_objective(points: &[[f64; 3]], bound: [f64; 3]) -> f64 {
    let n = points.len();
    let rows = 4;
    let cols = n + 3 + 4;
    let w = cols + 1;
    let mut data = vec![0.0; (rows + 1) * w];
    for j in 0..3 {
        let sign = if bound[j] < 0.0 { -1.0 } else { 1.0 };
        for (i, p) in points.iter().enumerate() {
            data[j * w + i] = sign * p[j];
        }
        data[j * w + n + j] = sign;
        data[j * w + n + 3 + j] = 1.0;
        data[j * w + cols] = sign * bound[j];
    }
    for i in 0..n {
        data[3 * w + i] = 1.0;
    }
    data[3 * w + n + 3 + 3] = 1.0;
    data[3 * w + cols] = 1.0;
    // Reduced costs of the phase-one objective (sum of artificials) with
    // the artificials basic: minus the column sums over constraint rows.
    for c in 0..n + 3 {
        data[rows * w + c] = -(0..rows).map(|r| data[r * w + c]).sum::<f64>();
    }
    data[rows * w + cols] = -(0..rows).map(|r| data[r * w + cols]).sum::<f64>();

    let mut t = Tableau {
        rows,
        cols,
        data,
        basis: (n + 3..n + 7).collect(),
    };

    let dantzig_limit = 50 * (n + 7);
    let hard_limit = 200 * (n + 7) + 1000;
    for iter in 0..hard_limit {
        let bland = iter >= dantzig_limit;
        let mut entering = None;
        let mut best = -PIVOT_EPS;
        for c in 0..cols {
            let rc = t.at(rows, c);
            if rc < best {
                entering = Some(c);
                if bland {
                    break;
                }
                best = rc;
            }
        }
        let Some(pc) = entering else { break };
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = t.at(r, pc);
            if a > PIVOT_EPS {
                let ratio = t.rhs(r) / a;
                match leaving {
                    None => leaving = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - PIVOT_EPS
                            || (ratio <= lratio + PIVOT_EPS && t.basis[r] < t.basis[lr])
                        {
                            leaving = Some((r, ratio));
                        }
                    }
                }
            }
        }
        // Phase one is bounded below by zero, so an unbounded column cannot
        // occur; treat it as a numerical dead end.
        let Some((pr, _)) = leaving else { break };
        t.pivot(pr, pc);
    }
    -t.rhs(rows)
}
