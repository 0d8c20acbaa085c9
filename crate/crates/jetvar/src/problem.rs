//! Line-based problem files.
//!
//! ```text
//! base 1
//! coords x
//! field u
//! order 1
//! lagrangian (1/2)*u_x^2 - (1/2)*u^2
//! section u = sin(x)        # optional, for verify
//! variation u = cos(x)      # optional, for verify
//! grid 64                   # optional
//! fd_step 1e-5              # optional
//! seed 42                   # optional
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symexpr::{parse_expr, Expr, Func, JetSpace, ParseError, SectionSym, SpaceError};
use crate::vforms::VForm;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: declared order {declared} but the Lagrangian reaches order {found}")]
    OrderMismatch {
        line: usize,
        declared: usize,
        found: u32,
    },
    #[error("line {line}: duplicate name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("{0}")]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub space: Arc<JetSpace>,
    pub order: usize,
    pub lagrangian: VForm,
    pub sections: BTreeMap<usize, Expr>,
    pub variations: BTreeMap<usize, Expr>,
    pub grid_points: usize,
    pub fd_step: f64,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 42;

pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ProblemError> {
    let mut base: Option<usize> = None;
    let mut coords: Vec<String> = Vec::new();
    let mut fields: Vec<String> = Vec::new();
    let mut order: Option<(usize, usize)> = None; // (line, value)
    let mut lagrangian_src: Option<(usize, String)> = None;
    let mut section_src: Vec<(usize, String)> = Vec::new();
    let mut variation_src: Vec<(usize, String)> = Vec::new();
    let mut grid_points = crate::numcheck::DEFAULT_GRID;
    let mut fd_step = crate::numcheck::DEFAULT_FD_STEP;
    let mut seed = DEFAULT_SEED;

    let syntax = |line: usize, msg: &str| ProblemError::Syntax {
        line,
        msg: msg.to_string(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };
        match key {
            "base" => {
                base = Some(
                    rest.parse()
                        .map_err(|_| syntax(line, "expected a positive integer after `base`"))?,
                );
            }
            "coords" => {
                for name in rest.split_whitespace() {
                    push_name(&mut coords, &fields, name, line)?;
                }
            }
            "field" => {
                for name in rest.split_whitespace() {
                    push_name(&mut fields, &coords, name, line)?;
                }
            }
            "order" => {
                let value = rest
                    .parse()
                    .map_err(|_| syntax(line, "expected a non-negative integer after `order`"))?;
                order = Some((line, value));
            }
            "lagrangian" => {
                if rest.is_empty() {
                    return Err(syntax(line, "missing expression after `lagrangian`"));
                }
                lagrangian_src = Some((line, rest.to_string()));
            }
            "section" => section_src.push((line, rest.to_string())),
            "variation" => variation_src.push((line, rest.to_string())),
            "grid" => {
                grid_points = rest
                    .parse()
                    .map_err(|_| syntax(line, "expected an integer after `grid`"))?;
            }
            "fd_step" => {
                fd_step = rest
                    .parse()
                    .map_err(|_| syntax(line, "expected a number after `fd_step`"))?;
            }
            "seed" => {
                seed = rest
                    .parse()
                    .map_err(|_| syntax(line, "expected an integer after `seed`"))?;
            }
            other => {
                return Err(syntax(line, &format!("unknown directive `{other}`")));
            }
        }
    }

    let base = base.ok_or_else(|| syntax(0, "missing `base` line"))?;
    if coords.len() != base {
        return Err(syntax(
            0,
            &format!("`coords` declares {} names but base is {base}", coords.len()),
        ));
    }
    if fields.is_empty() {
        return Err(syntax(0, "missing `field` line"));
    }
    let (order_line, order) = order.ok_or_else(|| syntax(0, "missing `order` line"))?;
    let (lag_line, lag_src) = lagrangian_src.ok_or_else(|| syntax(0, "missing `lagrangian` line"))?;

    let space = JetSpace::new(coords, fields, order)?;

    let density = match parse_expr(&lag_src, &space) {
        Ok(e) => e,
        Err(ParseError::OrderExceeded { order: found, .. }) => {
            return Err(ProblemError::OrderMismatch {
                line: order_line,
                declared: order,
                found,
            })
        }
        Err(e) => return Err(ProblemError::Expr {
            line: lag_line,
            source: e,
        }),
    };
    let lagrangian = VForm::lagrangian(space.clone(), density);

    let mut sections = BTreeMap::new();
    for (line, src) in section_src {
        let (field, expr) = parse_assignment(&space, line, &src)?;
        if sections.insert(field, expr).is_some() {
            return Err(ProblemError::DuplicateName {
                line,
                name: space.field_name(field).to_string(),
            });
        }
    }
    let mut variations = BTreeMap::new();
    for (line, src) in variation_src {
        let (field, expr) = parse_assignment(&space, line, &src)?;
        if variations.insert(field, expr).is_some() {
            return Err(ProblemError::DuplicateName {
                line,
                name: space.field_name(field).to_string(),
            });
        }
    }

    Ok(ProblemFile {
        space,
        order,
        lagrangian,
        sections,
        variations,
        grid_points,
        fd_step,
        seed,
    })
}

fn push_name(
    target: &mut Vec<String>,
    other: &[String],
    name: &str,
    line: usize,
) -> Result<(), ProblemError> {
    if !name.chars().all(|c| c.is_ascii_alphanumeric()) || !name.starts_with(char::is_alphabetic) {
        return Err(ProblemError::Syntax {
            line,
            msg: format!("invalid identifier `{name}` (alphanumeric, no underscore)"),
        });
    }
    if target.iter().any(|n| n == name) || other.iter().any(|n| n == name) {
        return Err(ProblemError::DuplicateName {
            line,
            name: name.to_string(),
        });
    }
    target.push(name.to_string());
    Ok(())
}

fn parse_assignment(
    space: &Arc<JetSpace>,
    line: usize,
    src: &str,
) -> Result<(usize, Expr), ProblemError> {
    let (lhs, rhs) = src.split_once('=').ok_or_else(|| ProblemError::Syntax {
        line,
        msg: "expected `field = expression`".to_string(),
    })?;
    let name = lhs.trim();
    let field = space
        .field_index(name)
        .ok_or_else(|| ProblemError::Syntax {
            line,
            msg: format!("unknown field `{name}`"),
        })?;
    let expr = parse_expr(rhs.trim(), space).map_err(|e| ProblemError::Expr { line, source: e })?;
    if expr.contains_jet() {
        return Err(ProblemError::Syntax {
            line,
            msg: "section/variation expressions may reference base coordinates only".to_string(),
        });
    }
    Ok((field, expr))
}

impl ProblemFile {
    /// The declared section, or a seeded random trig polynomial for every
    /// missing field (smooth, periodic, reproducible).
    pub fn section(&self) -> SectionSym {
        self.assemble(&self.sections, 0)
    }

    pub fn variation(&self) -> SectionSym {
        self.assemble(&self.variations, 1)
    }

    fn assemble(&self, given: &BTreeMap<usize, Expr>, stream: u64) -> SectionSym {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(stream));
        let components = (0..self.space.num_fields())
            .map(|a| match given.get(&a) {
                Some(e) => e.clone(),
                None => random_trig_component(&mut rng, self.space.dim()),
            })
            .collect();
        SectionSym::closed(self.space.clone(), components)
            .expect("trig components are jet-free")
    }
}

/// A random trig polynomial `c0 + sum_i sum_{k<=3} a sin(k xi^i) + b cos(k xi^i)`
/// with exact rational coefficients drawn from [-1, 1].
pub fn random_trig_component<R: Rng>(rng: &mut R, dim: usize) -> Expr {
    let mut coeff = |scale: i64| {
        let n = rng.gen_range(-1000..=1000i64);
        Expr::ratio(n, 1000 * scale)
    };
    let mut terms = vec![coeff(1)];
    for axis in 0..dim {
        for k in 1..=3i64 {
            let arg = Expr::int(k) * Expr::base(axis);
            terms.push(coeff(k) * Expr::func(Func::Sin, arg.clone()));
            terms.push(coeff(k) * Expr::func(Func::Cos, arg));
        }
    }
    Expr::Add(terms)
}
