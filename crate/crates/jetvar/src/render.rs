//! Text, LaTeX, and JSON renderers for expressions and forms.
//!
//! The text renderer produces strings in the expression grammar, so
//! `parse(render(f))` canonicalizes back to `f`. Sums print in the
//! descending term order fixed by canonicalization; an all-negative sum
//! factors the sign out front.

use num::{One, Signed};
use serde::Serialize;

use crate::multiindex::MultiIndex;
use crate::symexpr::{Expr, JetSpace, Rational};
use crate::vforms::{VForm, VKey};

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Sum,
    Product,
    Power,
}

#[derive(Clone, Copy)]
struct Style {
    latex: bool,
}

struct Names<'a> {
    space: Option<&'a JetSpace>,
}

impl<'a> Names<'a> {
    fn coord(&self, axis: usize) -> String {
        match self.space {
            Some(s) => s.coord_name(axis).to_string(),
            None => format!("x{}", axis + 1),
        }
    }

    fn field(&self, field: usize) -> String {
        match self.space {
            Some(s) => s.field_name(field).to_string(),
            None => format!("u{}", field + 1),
        }
    }

    fn suffix(&self, index: &MultiIndex) -> String {
        let mut out = String::new();
        for (axis, &count) in index.counts().iter().enumerate() {
            for _ in 0..count {
                out.push_str(&self.coord(axis));
            }
        }
        out
    }

    fn var(&self, name: &str, index: &MultiIndex, style: Style) -> String {
        if index.is_zero() {
            return name.to_string();
        }
        if style.latex {
            format!("{}_{{{}}}", name, self.suffix(index))
        } else {
            format!("{}_{}", name, self.suffix(index))
        }
    }
}

pub fn expr_text(e: &Expr, space: &JetSpace) -> String {
    render(e, &Names { space: Some(space) }, Style { latex: false }, Ctx::Sum)
}

pub fn expr_latex(e: &Expr, space: &JetSpace) -> String {
    render(e, &Names { space: Some(space) }, Style { latex: true }, Ctx::Sum)
}

/// Fallback rendering with generic coordinate names; used by `Display`.
pub fn expr_text_generic(e: &Expr) -> String {
    render(e, &Names { space: None }, Style { latex: false }, Ctx::Sum)
}

fn rational(r: &Rational, style: Style, ctx: Ctx) -> String {
    if r.is_integer() {
        let s = r.to_integer().to_string();
        if r.is_negative() && ctx != Ctx::Sum {
            format!("({s})")
        } else {
            s
        }
    } else if style.latex {
        let sign = if r.is_negative() { "-" } else { "" };
        format!(
            "{}\\frac{{{}}}{{{}}}",
            sign,
            r.numer().magnitude(),
            r.denom().magnitude()
        )
    } else {
        let s = format!("{}/{}", r.numer(), r.denom());
        if ctx == Ctx::Sum {
            s
        } else {
            format!("({s})")
        }
    }
}

fn render(e: &Expr, names: &Names, style: Style, ctx: Ctx) -> String {
    match e {
        Expr::Num(r) => rational(r, style, ctx),
        Expr::Base(i) => names.coord(*i),
        Expr::Jet(a, n) => names.var(&names.field(*a), n, style),
        Expr::Opaque(at) => names.var(&at.name, &at.deriv, style),
        Expr::Add(terms) => {
            let body = render_sum(terms, names, style);
            if ctx == Ctx::Sum {
                body
            } else {
                format!("({body})")
            }
        }
        Expr::Mul(factors) => {
            let sep = if style.latex { "\\," } else { "*" };
            let body = factors
                .iter()
                .map(|f| render(f, names, style, Ctx::Product))
                .collect::<Vec<_>>()
                .join(sep);
            if ctx == Ctx::Power {
                format!("({body})")
            } else {
                body
            }
        }
        Expr::Pow(base, k) => {
            let b = render(base, names, style, Ctx::Power);
            if style.latex {
                format!("{b}^{{{k}}}")
            } else {
                format!("{b}^{k}")
            }
        }
        Expr::Func(f, arg) => {
            let inner = render(arg, names, style, Ctx::Sum);
            if style.latex {
                format!("\\{}({})", f.name(), inner)
            } else {
                format!("{}({})", f.name(), inner)
            }
        }
        Expr::Neg(x) => {
            let body = render(x, names, style, Ctx::Product);
            match ctx {
                Ctx::Sum => format!("-{body}"),
                _ => format!("(-{body})"),
            }
        }
    }
}

fn render_sum(terms: &[Expr], names: &Names, style: Style) -> String {
    let all_negative =
        terms.len() >= 2 && terms.iter().all(|t| matches!(t, Expr::Neg(_)));
    let plus = if style.latex { "+" } else { " + " };
    let minus = if style.latex { "-" } else { " - " };
    if all_negative {
        let inner = terms
            .iter()
            .map(|t| match t {
                Expr::Neg(x) => render(x, names, style, Ctx::Sum),
                _ => unreachable!(),
            })
            .collect::<Vec<_>>()
            .join(plus);
        return format!("-({inner})");
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        match t {
            Expr::Neg(x) => {
                out.push_str(if i == 0 { "-" } else { minus });
                out.push_str(&render(x, names, style, Ctx::Product));
            }
            _ => {
                if i > 0 {
                    out.push_str(plus);
                }
                out.push_str(&render(t, names, style, Ctx::Sum));
            }
        }
    }
    out
}

/// Sign-and-body split of a coefficient for form-term rendering: `1` and
/// `-1` drop the body entirely, an all-negative sum moves its sign out.
fn coeff_parts(c: &Expr, names: &Names, style: Style) -> (bool, String) {
    match c {
        Expr::Num(r) if r.is_one() => (false, String::new()),
        Expr::Neg(x) => {
            let (_, body) = coeff_parts(x, names, style);
            (true, body)
        }
        Expr::Add(terms)
            if terms.len() >= 2 && terms.iter().all(|t| matches!(t, Expr::Neg(_))) =>
        {
            let positives: Vec<Expr> = terms
                .iter()
                .map(|t| match t {
                    Expr::Neg(x) => (**x).clone(),
                    _ => unreachable!(),
                })
                .collect();
            let inner = render_sum(&positives, names, style);
            (true, format!("({inner})"))
        }
        other => (false, render(other, names, style, Ctx::Product)),
    }
}

fn covectors(key: &VKey, names: &Names, style: Style) -> String {
    let wedge = if style.latex { "\\wedge " } else { "∧" };
    let mut parts: Vec<String> = Vec::new();
    // Storage order is the canonical (sign-bearing) order; render as stored.
    for (a, n) in key.dpsi.iter() {
        parts.push(format!("d{}", names.var(&names.field(*a), n, style)));
    }
    let contact = parts.join(wedge);
    let horiz = if key.dx.is_empty() {
        "1".to_string()
    } else {
        key.dx
            .iter()
            .map(|&i| format!("d{}", names.coord(i)))
            .collect::<Vec<_>>()
            .join(wedge)
    };
    let otimes = if style.latex { "\\otimes " } else { " ⊗ " };
    if contact.is_empty() {
        horiz
    } else {
        format!("{contact}{otimes}{horiz}")
    }
}

fn vform_render(form: &VForm, style: Style) -> String {
    if form.is_zero() {
        return "0".to_string();
    }
    let names = Names {
        space: Some(form.space()),
    };
    let mut out = String::new();
    let plus = if style.latex { "+" } else { " + " };
    let minus = if style.latex { "-" } else { " - " };
    for (i, (key, coeff)) in form.terms().iter().rev().enumerate() {
        let (neg, body) = coeff_parts(coeff, &names, style);
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { minus } else { plus });
        }
        if !body.is_empty() {
            out.push_str(&body);
            out.push_str(if style.latex { "\\," } else { " " });
        }
        out.push_str(&covectors(key, &names, style));
    }
    out
}

pub fn vform_text(form: &VForm) -> String {
    vform_render(form, Style { latex: false })
}

pub fn vform_latex(form: &VForm) -> String {
    vform_render(form, Style { latex: true })
}

#[derive(Debug, Serialize)]
pub struct VFormJson {
    pub bidegree: [usize; 2],
    pub orders: [usize; 2],
    pub terms: Vec<VFormTermJson>,
}

#[derive(Debug, Serialize)]
pub struct VFormTermJson {
    /// 1-based horizontal axes.
    pub dx: Vec<usize>,
    /// Contact covectors as (field name, derivative counts).
    pub dpsi: Vec<(String, Vec<u32>)>,
    pub coeff: String,
}

pub fn vform_json(form: &VForm) -> VFormJson {
    let space = form.space();
    VFormJson {
        bidegree: [form.horiz_degree(), form.contact_degree()],
        orders: [form.coeff_order(), form.contact_order()],
        terms: form
            .terms()
            .iter()
            .map(|(key, coeff)| VFormTermJson {
                dx: key.dx.iter().map(|&i| i + 1).collect(),
                dpsi: key
                    .dpsi
                    .iter()
                    .map(|(a, n)| {
                        (
                            space.field_name(*a).to_string(),
                            n.counts().to_vec(),
                        )
                    })
                    .collect(),
                coeff: expr_text(coeff, space),
            })
            .collect(),
    }
}
