//! Projective resolutions of the simples of End_R(⊕S) and global dimension.

use std::fmt;

use thiserror::Error;

use crate::ladder::{knit, Approximation, Budgets, KnitError};
use crate::quiver::{ModuleVector, TranslationQuiver, VertexId, VertexSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolutionStatus {
    Finite {
        pd: usize,
    },
    /// The non-S support of `kernels[period_detected_at]` equals that of
    /// `kernels[repeats]`.
    Infinite {
        period_detected_at: usize,
        repeats: usize,
    },
    BudgetExhausted {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub simple_at: VertexId,
    /// `terms[0]` is the projective cover of the simple, then the
    /// projective terms in order.
    pub terms: Vec<ModuleVector>,
    pub kernels: Vec<ModuleVector>,
    pub status: ResolutionStatus,
}

impl Resolution {
    pub fn pd(&self) -> Option<usize> {
        match self.status {
            ResolutionStatus::Finite { pd } => Some(pd),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.status, ResolutionStatus::Infinite { .. })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("simple vertex {0} is not in the vertex set")]
    NotInSet(VertexId),
    #[error(transparent)]
    Knit(KnitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlobalDimension {
    Finite(usize),
    Infinite,
    Unknown,
}

impl fmt::Display for GlobalDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalDimension::Finite(d) => write!(f, "{d}"),
            GlobalDimension::Infinite => write!(f, "infinite"),
            GlobalDimension::Unknown => write!(f, "unknown"),
        }
    }
}

/// Knit results for one vertex set, shared by the simples of that set.
/// `None` inside the slot records a level-budget exhaustion.
pub struct Resolver<'q> {
    q: &'q TranslationQuiver,
    s: VertexSet,
    budgets: Budgets,
    cache: Vec<Option<Option<Approximation>>>,
}

impl<'q> Resolver<'q> {
    pub fn new(q: &'q TranslationQuiver, s: VertexSet, budgets: Budgets) -> Self {
        Self {
            q,
            s,
            budgets,
            cache: vec![None; q.len()],
        }
    }

    fn approx(&mut self, target: VertexId) -> Result<Option<&Approximation>, ResolveError> {
        if self.cache[target].is_none() {
            let a = match knit(self.q, target, self.s, self.budgets.max_levels) {
                Ok(a) => Some(a),
                Err(KnitError::BudgetExhausted { .. }) => None,
                Err(e) => return Err(ResolveError::Knit(e)),
            };
            self.cache[target] = Some(a);
        }
        Ok(self.cache[target].as_ref().and_then(Option::as_ref))
    }

    pub fn resolve(&mut self, z: VertexId) -> Result<Resolution, ResolveError> {
        if !self.s.contains(z) {
            return Err(ResolveError::NotInSet(z));
        }
        let max_levels = self.budgets.max_levels;
        let level_budget = move |v: VertexId| ResolutionStatus::BudgetExhausted {
            reason: format!("knit of vertex {v} exceeded {max_levels} levels"),
        };
        let mut terms = vec![ModuleVector::unit(z)];
        let mut kernels = Vec::new();
        let Some(first) = self.approx(z)? else {
            return Ok(Resolution {
                simple_at: z,
                terms,
                kernels,
                status: level_budget(z),
            });
        };
        terms.push(first.middle.clone());
        kernels.push(first.kernel.clone());

        let mut supports: Vec<VertexSet> = Vec::new();
        let mut step = 0;
        let status = loop {
            let (in_s, rest) = kernels[step].split(self.s);
            if rest.is_zero() {
                if !in_s.is_zero() {
                    terms.push(in_s);
                }
                let pd = terms.iter().rposition(|t| !t.is_zero()).unwrap_or(0);
                break ResolutionStatus::Finite { pd };
            }
            let support = rest.support();
            if let Some(j) = supports.iter().position(|&p| p == support) {
                break ResolutionStatus::Infinite {
                    period_detected_at: step,
                    repeats: j,
                };
            }
            supports.push(support);
            if step >= self.budgets.max_steps {
                break ResolutionStatus::BudgetExhausted {
                    reason: format!("resolution exceeded {} steps", self.budgets.max_steps),
                };
            }

            let mut term = in_s;
            let mut next = ModuleVector::new();
            let mut exhausted = None;
            for (c, m) in rest.iter() {
                match self.approx(c)? {
                    Some(a) => {
                        term.add_scaled(&a.middle, m);
                        next.add_scaled(&a.kernel, m);
                    }
                    None => {
                        exhausted = Some(c);
                        break;
                    }
                }
            }
            if let Some(c) = exhausted {
                break level_budget(c);
            }
            terms.push(term);
            kernels.push(next);
            step += 1;
        };
        Ok(Resolution {
            simple_at: z,
            terms,
            kernels,
            status,
        })
    }

    pub fn global_dimension(&mut self) -> Result<GlobalDimension, ResolveError> {
        let mut best = 0;
        let mut unknown = false;
        for z in self.s.iter() {
            match self.resolve(z)?.status {
                ResolutionStatus::Finite { pd } => best = best.max(pd),
                ResolutionStatus::Infinite { .. } => return Ok(GlobalDimension::Infinite),
                ResolutionStatus::BudgetExhausted { .. } => unknown = true,
            }
        }
        Ok(if unknown {
            GlobalDimension::Unknown
        } else {
            GlobalDimension::Finite(best)
        })
    }
}

/// Minimal projective resolution of the simple at `z` over End_R(⊕S).
pub fn resolve_simple(
    q: &TranslationQuiver,
    s: VertexSet,
    z: VertexId,
    budgets: Budgets,
) -> Result<Resolution, ResolveError> {
    Resolver::new(q, s, budgets).resolve(z)
}

/// max pd over the simples; infinite beats unknown.
pub fn global_dimension(
    q: &TranslationQuiver,
    s: VertexSet,
    budgets: Budgets,
) -> Result<GlobalDimension, ResolveError> {
    if s.is_empty() {
        return Err(ResolveError::Knit(KnitError::EmptySet));
    }
    Resolver::new(q, s, budgets).global_dimension()
}
