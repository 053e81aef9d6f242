use std::path::Path;

use crate::error::{Error, Result};

/// One-year survival probabilities p_x for consecutive integer ages.
///
/// The last tabulated age is ω: nobody survives past it, so `_n p_x = 0` once `x + n > ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    base_age: u32,
    one_year_survival: Vec<f64>,
}

impl MortalityTable {
    pub fn new(base_age: u32, one_year_survival: Vec<f64>) -> Result<Self> {
        if one_year_survival.is_empty() {
            return Err(Error::invalid("mortality table is empty"));
        }
        if let Some((i, p)) = one_year_survival
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::invalid(format!(
                "survival probability {p} at age {} is outside [0, 1]",
                base_age as usize + i
            )));
        }
        Ok(Self {
            base_age,
            one_year_survival,
        })
    }

    /// Same one-year survival probability at every age from `base_age` to `omega`.
    pub fn flat(base_age: u32, omega: u32, p: f64) -> Result<Self> {
        if omega < base_age {
            return Err(Error::invalid("omega below base age"));
        }
        Self::new(base_age, vec![p; (omega - base_age + 1) as usize])
    }

    /// Reads `(age, p)` rows; ages must be consecutive integers.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = super::read_pairs(path)?;
        let base_age = integer_age(rows[0].0, path, 2)?;
        for (i, &(age, _)) in rows.iter().enumerate() {
            let a = integer_age(age, path, i + 2)?;
            if a != base_age + i as u32 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("expected age {}, found {a}", base_age + i as u32),
                });
            }
        }
        Self::new(base_age, rows.into_iter().map(|r| r.1).collect())
    }

    pub fn base_age(&self) -> u32 {
        self.base_age
    }

    /// Largest survival age ω.
    pub fn omega(&self) -> u32 {
        self.base_age + self.one_year_survival.len() as u32 - 1
    }

    /// One-year survival probability at age `x` (zero at ω and beyond).
    pub fn one_year(&self, x: u32) -> Result<f64> {
        self.check_age(x)?;
        if x >= self.omega() {
            return Ok(0.0);
        }
        Ok(self.one_year_survival[(x - self.base_age) as usize])
    }

    /// `_n p_x`, the probability that a life aged `x` survives `n` more years.
    pub fn survival(&self, x: u32, n: u32) -> Result<f64> {
        self.check_age(x)?;
        if n == 0 {
            return Ok(1.0);
        }
        if x as u64 + n as u64 > self.omega() as u64 {
            return Ok(0.0);
        }
        let start = (x - self.base_age) as usize;
        Ok(self.one_year_survival[start..start + n as usize].iter().product())
    }

    fn check_age(&self, x: u32) -> Result<()> {
        if x < self.base_age {
            return Err(Error::OutOfRange {
                what: "age",
                value: x as f64,
                min: self.base_age as f64,
                max: self.omega() as f64,
            });
        }
        Ok(())
    }
}

fn integer_age(age: f64, path: &Path, line: usize) -> Result<u32> {
    if age >= 0.0 && age.fract() == 0.0 && age <= u32::MAX as f64 {
        Ok(age as u32)
    } else {
        Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("age {age} is not a non-negative integer"),
        })
    }
}
