//! Mixed-integer linear model of the allocation problem.
//!
//! Binary `x[u][a][w]` selects the pair serving user `u`. Each pairwise
//! interference product `x[u][a][w]·x[u'][a'][w]` is replaced by a continuous
//! `y ≥ x + x' - 1, y ≥ 0`. Its objective coefficient is non-positive, so any
//! optimum pushes `y` down to `max(0, x + x' - 1)` and no upper bound is
//! needed.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AllocationInstance;
use crate::linkbudget::{Assignment, Link};
use crate::optics::Wavelength;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Constraint<T> {
    pub name: String,
    pub terms: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

/// Linearisation variable for victim `user` on `(luminaire, wavelength)` and
/// interferer `other` on `(other_luminaire, wavelength)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxLink {
    pub user: usize,
    pub luminaire: usize,
    pub other: usize,
    pub other_luminaire: usize,
    pub wavelength: Wavelength,
    pub var: usize,
}

/// Maximisation model; all variables are bounded below by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MilpModel<T> {
    pub n_users: usize,
    pub n_pairs: usize,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint<T>>,
    pub objective: Vec<(usize, T)>,
    pub aux: Vec<AuxLink>,
}

pub fn formulate_milp<T: Scalar>(inst: &AllocationInstance<T>) -> MilpModel<T> {
    let n = inst.n_users;
    let n_pairs = inst.n_pairs();
    let mut variables = Vec::with_capacity(n * n_pairs);
    let mut objective = Vec::new();
    for u in 0..n {
        for p in 0..n_pairs {
            let l = Link::from_pair_index(p);
            variables.push(Variable {
                name: format!("x_{u}_{}_{}", l.luminaire, l.wavelength.name()),
                kind: VarKind::Binary,
            });
            objective.push((u * n_pairs + p, inst.link_value(u, p)));
        }
    }
    let x = |u: usize, a: usize, w: Wavelength| u * n_pairs + Link::new(a, w).pair_index();

    let mut constraints = Vec::new();
    for u in 0..n {
        constraints.push(Constraint {
            name: format!("serve_{u}"),
            terms: (0..n_pairs).map(|p| (u * n_pairs + p, T::one())).collect(),
            sense: Sense::Eq,
            rhs: T::one(),
        });
    }
    for p in 0..n_pairs {
        let l = Link::from_pair_index(p);
        constraints.push(Constraint {
            name: format!("pair_{}_{}", l.luminaire, l.wavelength.name()),
            terms: (0..n).map(|u| (u * n_pairs + p, T::one())).collect(),
            sense: Sense::Le,
            rhs: T::one(),
        });
    }

    let mut aux = Vec::new();
    for u in 0..n {
        for a in 0..inst.n_luminaires {
            for u2 in (0..n).filter(|&u2| u2 != u) {
                for a2 in (0..inst.n_luminaires).filter(|&a2| a2 != a) {
                    for w in Wavelength::ALL {
                        let var = variables.len();
                        let name = format!("y_{u}_{a}_{u2}_{a2}_{}", w.name());
                        variables.push(Variable {
                            name: name.clone(),
                            kind: VarKind::Continuous,
                        });
                        objective.push((
                            var,
                            -inst.weights.interference * inst.interference(u, a, u2, a2, w),
                        ));
                        constraints.push(Constraint {
                            name: format!("link_{name}"),
                            terms: vec![
                                (var, T::one()),
                                (x(u, a, w), -T::one()),
                                (x(u2, a2, w), -T::one()),
                            ],
                            sense: Sense::Ge,
                            rhs: -T::one(),
                        });
                        aux.push(AuxLink {
                            user: u,
                            luminaire: a,
                            other: u2,
                            other_luminaire: a2,
                            wavelength: w,
                            var,
                        });
                    }
                }
            }
        }
    }
    MilpModel {
        n_users: n,
        n_pairs,
        variables,
        constraints,
        objective,
        aux,
    }
}

impl<T: Scalar> MilpModel<T> {
    pub fn n_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn n_aux(&self) -> usize {
        self.aux.len()
    }

    pub fn count(&self, sense: Sense) -> usize {
        self.constraints.iter().filter(|c| c.sense == sense).count()
    }

    /// Variable values for an assignment with every `y` at its smallest
    /// feasible value.
    pub fn point_for(&self, assignment: &Assignment) -> Vec<T> {
        let mut values = vec![T::zero(); self.variables.len()];
        for (u, l) in assignment.links().iter().enumerate() {
            values[u * self.n_pairs + l.pair_index()] = T::one();
        }
        for y in &self.aux {
            let xa = values[y.user * self.n_pairs + Link::new(y.luminaire, y.wavelength).pair_index()];
            let xb = values[y.other * self.n_pairs + Link::new(y.other_luminaire, y.wavelength).pair_index()];
            values[y.var] = (xa + xb - T::one()).max(T::zero());
        }
        values
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.objective.iter().map(|&(i, c)| c * values[i]).sum()
    }

    /// Checks bounds, integrality and every constraint to within `tol`.
    pub fn is_feasible(&self, values: &[T], tol: T) -> bool {
        if values.len() != self.variables.len() {
            return false;
        }
        let kinds_ok = self.variables.iter().zip(values).all(|(v, &x)| {
            x >= -tol
                && match v.kind {
                    VarKind::Binary => x.abs() <= tol || (x - T::one()).abs() <= tol,
                    VarKind::Continuous => true,
                }
        });
        kinds_ok
            && self.constraints.iter().all(|c| {
                let lhs: T = c.terms.iter().map(|&(i, k)| k * values[i]).sum();
                match c.sense {
                    Sense::Eq => (lhs - c.rhs).abs() <= tol,
                    Sense::Le => lhs <= c.rhs + tol,
                    Sense::Ge => lhs >= c.rhs - tol,
                }
            })
    }

    /// CPLEX LP text for handing the model to an external solver.
    pub fn to_lp(&self) -> String {
        let mut out = String::from("Maximize\n obj:");
        let term = |out: &mut String, i: usize, c: T| {
            let c = c.as_f64();
            let sign = if c < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {:.17e} {}", c.abs(), self.variables[i].name);
        };
        for &(i, c) in &self.objective {
            term(&mut out, i, c);
        }
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            for &(i, k) in &c.terms {
                term(&mut out, i, k);
            }
            let op = match c.sense {
                Sense::Eq => "=",
                Sense::Le => "<=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs.as_f64());
        }
        out.push_str("Binary\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        out.push_str("End\n");
        out
    }
}
