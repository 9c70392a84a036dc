//! Tripartite CSP whose constraints have the shape
//! `(x ∨ (Y = z_k)) ∧ (¬x ∨ (Y = z_l))`, with `Y` a literal of a `y` variable
//! and the `z` variables always unnegated.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub x: usize,
    pub y: usize,
    #[serde(rename = "yneg")]
    pub y_negated: bool,
    pub zk: usize,
    pub zl: usize,
}

impl Constraint {
    /// Value of the literal `Y` under `a`.
    pub fn y_literal(&self, a: &Assignment) -> bool {
        a.y[self.y] ^ self.y_negated
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        let x = a.x[self.x];
        let y = self.y_literal(a);
        (x || y == a.z[self.zk]) && (!x || y == a.z[self.zl])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspInstance {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(nx: usize, ny: usize, nz: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let inst = Self {
            nx,
            ny,
            nz,
            constraints,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.constraints.iter().enumerate() {
            if c.x >= self.nx || c.y >= self.ny || c.zk >= self.nz || c.zl >= self.nz {
                return Err(Error::InvalidCsp(format!(
                    "constraint {i} references a variable out of range"
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_count(&self) -> usize {
        self.nx + self.ny + self.nz
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: CspInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn check_assignment(&self, a: &Assignment) -> Result<()> {
        if a.x.len() != self.nx || a.y.len() != self.ny || a.z.len() != self.nz {
            return Err(Error::InvalidAssignment(format!(
                "assignment sizes ({}, {}, {}) do not match instance ({}, {}, {})",
                a.x.len(),
                a.y.len(),
                a.z.len(),
                self.nx,
                self.ny,
                self.nz
            )));
        }
        Ok(())
    }
}

/// Boolean values for every X, Y and Z variable. Serialized as 0/1 arrays.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(serialize_with = "ser_bits", deserialize_with = "de_bits")]
    pub x: Vec<bool>,
    #[serde(serialize_with = "ser_bits", deserialize_with = "de_bits")]
    pub y: Vec<bool>,
    #[serde(serialize_with = "ser_bits", deserialize_with = "de_bits")]
    pub z: Vec<bool>,
}

fn ser_bits<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(bits.iter().map(|&b| b as u8))
}

fn de_bits<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
    let raw: Vec<u8> = Vec::deserialize(d)?;
    raw.into_iter()
        .map(|b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("bit must be 0 or 1, got {other}"))),
        })
        .collect()
}

impl Assignment {
    pub fn all_false(inst: &CspInstance) -> Self {
        Self {
            x: vec![false; inst.nx],
            y: vec![false; inst.ny],
            z: vec![false; inst.nz],
        }
    }

    pub fn random(inst: &CspInstance, rng: &mut impl Rng) -> Self {
        let mut bits = |n| (0..n).map(|_| rng.random::<bool>()).collect();
        Self {
            x: bits(inst.nx),
            y: bits(inst.ny),
            z: bits(inst.nz),
        }
    }

    /// Variables in `x, y, z` order, the order used for lexicographic ties.
    fn from_bits(inst: &CspInstance, bits: &[bool]) -> Self {
        Self {
            x: bits[..inst.nx].to_vec(),
            y: bits[inst.nx..inst.nx + inst.ny].to_vec(),
            z: bits[inst.nx + inst.ny..].to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("assignment serializes")
    }
}

pub fn eval_constraint(c: &Constraint, a: &Assignment) -> bool {
    c.eval(a)
}

pub fn count_satisfied(inst: &CspInstance, a: &Assignment) -> usize {
    inst.constraints.iter().filter(|c| c.eval(a)).count()
}

/// Exhaustive maximum: enumerates all `2^(nx+ny+nz)` assignments.
///
/// Ties go to the lexicographically smallest assignment (variables ordered
/// `x, y, z`, false before true).
pub fn exact_max_sat(inst: &CspInstance, budget: u64) -> Result<(Assignment, usize)> {
    let n = inst.variable_count();
    let space = 1u128.checked_shl(n as u32).filter(|_| n < 127).unwrap_or(u128::MAX);
    if space > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "exhaustive max-sat",
            needed: space,
            budget,
        });
    }
    let mut bits = vec![false; n];
    let mut best = (Assignment::all_false(inst), count_satisfied(inst, &Assignment::all_false(inst)));
    for mask in 1u64..(1u64 << n) {
        // variable 0 is the most significant bit so masks increase lexicographically
        for (i, b) in bits.iter_mut().enumerate() {
            *b = (mask >> (n - 1 - i)) & 1 == 1;
        }
        let a = Assignment::from_bits(inst, &bits);
        let sat = count_satisfied(inst, &a);
        if sat > best.1 {
            best = (a, sat);
            if sat == inst.m() {
                break;
            }
        }
    }
    Ok(best)
}

fn check_pools(nx: usize, ny: usize, nz: usize, m: usize) -> Result<()> {
    if m > 0 && (nx == 0 || ny == 0 || nz == 0) {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {m} constraints from empty variable pools ({nx}, {ny}, {nz})"
        )));
    }
    Ok(())
}

fn random_constraint(rng: &mut impl Rng, nx: usize, ny: usize, nz: usize) -> Constraint {
    Constraint {
        x: rng.random_range(0..nx),
        y: rng.random_range(0..ny),
        y_negated: rng.random(),
        zk: rng.random_range(0..nz),
        zl: rng.random_range(0..nz),
    }
}

/// Satisfiable instance together with the assignment it was planted for.
///
/// Each constraint is drawn uniformly, then the binding clause is repaired:
/// the relevant `z` index is redrawn among variables whose planted value
/// matches the literal, and if no such variable exists the literal's sign is
/// flipped instead.
pub fn generate_planted(
    seed: u64,
    nx: usize,
    ny: usize,
    nz: usize,
    m: usize,
) -> Result<(CspInstance, Assignment)> {
    check_pools(nx, ny, nz, m)?;
    let mut rng = crate::seeded_rng(seed);
    let empty = CspInstance {
        nx,
        ny,
        nz,
        constraints: Vec::new(),
    };
    let planted = Assignment::random(&empty, &mut rng);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut c = random_constraint(&mut rng, nx, ny, nz);
        let y = c.y_literal(&planted);
        let slot_value = if planted.x[c.x] { planted.z[c.zl] } else { planted.z[c.zk] };
        if slot_value != y {
            let matching: Vec<usize> = (0..nz).filter(|&l| planted.z[l] == y).collect();
            if matching.is_empty() {
                c.y_negated = !c.y_negated;
            } else {
                let pick = matching[rng.random_range(0..matching.len())];
                if planted.x[c.x] {
                    c.zl = pick;
                } else {
                    c.zk = pick;
                }
            }
        }
        debug_assert!(c.eval(&planted));
        constraints.push(c);
    }
    Ok((CspInstance::new(nx, ny, nz, constraints)?, planted))
}

/// Instance with uniformly random constraint tuples.
pub fn generate_random(seed: u64, nx: usize, ny: usize, nz: usize, m: usize) -> Result<CspInstance> {
    check_pools(nx, ny, nz, m)?;
    let mut rng = crate::seeded_rng(seed);
    let constraints = (0..m).map(|_| random_constraint(&mut rng, nx, ny, nz)).collect();
    CspInstance::new(nx, ny, nz, constraints)
}
