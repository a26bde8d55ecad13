//! JSON description of a parametric coloring.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::set::{ColorClass, Exclusion, FormatSet, IndexVar, Injectivity, IntervalSet, ResidueFilter, SetShape, SymbolicSet};
use crate::diophantine::{EquationError, LinearEquation};
use crate::scalar::Scalar;
use crate::symcore::{parse_expr, AssumptionSet, Bindings, EvalError, Parity, SymExpr, Symbol};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Expr { field: String, message: String },
    #[error("{context} mentions undeclared symbol `{symbol}`")]
    UnknownSymbol { symbol: String, context: String },
    #[error("hint refers to unknown set `{0}`")]
    UnknownSet(String),
    #[error("duplicate set name `{0}`")]
    DuplicateSet(String),
    #[error("equation: {0}")]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("coefficient {0} does not fit in i64")]
    Overflow(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EquationFile {
    pub lhs_coeffs: Vec<String>,
    pub rhs_coeff: String,
    #[serde(default = "zero_string")]
    pub constant: String,
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssumptionsFile {
    #[serde(default)]
    pub lower: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub odd: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub even: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coprime: Vec<(String, String)>,
    /// Expressions assumed `>= 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFile {
    pub name: String,
    pub lower: String,
    pub upper: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueFile {
    pub modulus: String,
    pub combo: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExcludeFile {
    Value(String),
    Witnessed { value: String, witness: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetFile {
    #[serde(rename_all = "camelCase")]
    Interval {
        name: String,
        lower: String,
        upper: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        div: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ndiv: Vec<String>,
    },
    #[serde(rename_all = "camelCase")]
    Format {
        name: String,
        indices: Vec<IndexFile>,
        expr: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        div: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ndiv: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residue_filter: Option<ResidueFile>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        exclude: Vec<ExcludeFile>,
        /// `"declared"` to accept injectivity without proof.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        injective: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFile {
    pub name: String,
    pub sets: Vec<SetFile>,
}

/// "Every element of `set` is divisible by `divides`", checked before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintFile {
    pub set: String,
    pub divides: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpecFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub equation: EquationFile,
    pub symbols: Vec<String>,
    #[serde(default)]
    pub assumptions: AssumptionsFile,
    #[serde(rename = "N")]
    pub n: String,
    pub classes: Vec<ClassFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<HintFile>,
}

/// `sum lhs_i x_i + constant = rhs x_m` with symbolic coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymEquation<T: Scalar> {
    pub lhs: Vec<SymExpr<T>>,
    pub rhs: SymExpr<T>,
    pub constant: SymExpr<T>,
}

impl<T: Scalar> SymEquation<T> {
    pub fn arity(&self) -> usize {
        self.lhs.len() + 1
    }

    pub fn instantiate(&self, env: &Bindings<T>) -> Result<LinearEquation, SpecError> {
        let get = |e: &SymExpr<T>| -> Result<i64, SpecError> {
            let v = e.eval(env)?;
            v.to_i64().ok_or_else(|| SpecError::Overflow(v.to_string()))
        };
        let lhs = self.lhs.iter().map(get).collect::<Result<Vec<_>, _>>()?;
        Ok(LinearEquation::new(lhs, get(&self.rhs)?, get(&self.constant)?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hint<T: Scalar> {
    pub set: String,
    pub divides: SymExpr<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringSpec<T: Scalar> {
    pub name: String,
    pub description: Option<String>,
    pub equation: SymEquation<T>,
    pub symbols: Vec<Symbol>,
    pub asm: AssumptionSet<T>,
    pub n: SymExpr<T>,
    pub classes: Vec<ColorClass<T>>,
    pub hints: Vec<Hint<T>>,
}

struct Reader<'a> {
    symbols: &'a BTreeSet<Symbol>,
}

impl Reader<'_> {
    fn expr<T: Scalar>(&self, src: &str, field: &str, locals: &BTreeSet<Symbol>) -> Result<SymExpr<T>, SpecError> {
        let e: SymExpr<T> =
            parse_expr(src).map_err(|err| SpecError::Expr { field: field.to_string(), message: err.to_string() })?;
        if let Some(s) = e.symbols().into_iter().find(|s| !self.symbols.contains(s) && !locals.contains(s)) {
            return Err(SpecError::UnknownSymbol { symbol: s.to_string(), context: field.to_string() });
        }
        Ok(e)
    }

    fn exprs<T: Scalar>(&self, src: &[String], field: &str, locals: &BTreeSet<Symbol>) -> Result<Vec<SymExpr<T>>, SpecError> {
        src.iter().map(|s| self.expr(s, field, locals)).collect()
    }

    fn set<T: Scalar>(&self, f: &SetFile) -> Result<SymbolicSet<T>, SpecError> {
        let none = BTreeSet::new();
        match f {
            SetFile::Interval { name, lower, upper, div, ndiv } => {
                let ctx = |k: &str| format!("{name}.{k}");
                let s = IntervalSet {
                    lower: self.expr(lower, &ctx("lower"), &none)?,
                    upper: self.expr(upper, &ctx("upper"), &none)?,
                    div: self.exprs(div, &ctx("div"), &none)?,
                    ndiv: self.exprs(ndiv, &ctx("ndiv"), &none)?,
                };
                Ok(SymbolicSet::interval(name, s))
            }
            SetFile::Format { name, indices, expr, div, ndiv, residue_filter, exclude, injective } => {
                let ctx = |k: &str| format!("{name}.{k}");
                let mut locals = BTreeSet::new();
                let mut idx = Vec::new();
                for i in indices {
                    let field = ctx(&format!("indices.{}", i.name));
                    let var = IndexVar {
                        name: Symbol::new(&i.name),
                        lower: self.expr(&i.lower, &field, &locals)?,
                        upper: self.expr(&i.upper, &field, &locals)?,
                    };
                    locals.insert(var.name.clone());
                    idx.push(var);
                }
                let residue = match residue_filter {
                    Some(r) => Some(ResidueFilter {
                        modulus: self.expr(&r.modulus, &ctx("residueFilter"), &none)?,
                        combo: self.expr(&r.combo, &ctx("residueFilter"), &locals)?,
                    }),
                    None => None,
                };
                let mut excl = Vec::new();
                for x in exclude {
                    excl.push(match x {
                        ExcludeFile::Value(v) => Exclusion { value: self.expr(v, &ctx("exclude"), &none)?, witness: None },
                        ExcludeFile::Witnessed { value, witness } => {
                            let mut w = BTreeMap::new();
                            for (k, v) in witness {
                                w.insert(Symbol::new(k), self.expr(v, &ctx("exclude"), &none)?);
                            }
                            Exclusion { value: self.expr(value, &ctx("exclude"), &none)?, witness: Some(w) }
                        }
                    });
                }
                let injectivity = match injective.as_deref() {
                    Some("declared") => Injectivity::Declared,
                    Some(other) => {
                        return Err(SpecError::Expr {
                            field: ctx("injective"),
                            message: format!("expected \"declared\", got \"{other}\""),
                        })
                    }
                    None => Injectivity::Unknown,
                };
                let s = FormatSet {
                    indices: idx,
                    expr: self.expr(expr, &ctx("expr"), &locals)?,
                    div: self.exprs(div, &ctx("div"), &locals)?,
                    ndiv: self.exprs(ndiv, &ctx("ndiv"), &locals)?,
                    residue,
                    exclude: excl,
                    injectivity,
                };
                Ok(SymbolicSet::format(name, s))
            }
        }
    }
}

impl<T: Scalar> ColoringSpec<T> {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn from_file(f: &SpecFile) -> Result<Self, SpecError> {
        let symbols: Vec<Symbol> = f.symbols.iter().map(|s| Symbol::new(s)).collect();
        let declared: BTreeSet<Symbol> = symbols.iter().cloned().collect();
        let rd = Reader { symbols: &declared };
        let none = BTreeSet::new();
        let known = |s: &str, ctx: &str| -> Result<Symbol, SpecError> {
            let sym = Symbol::new(s);
            if declared.contains(&sym) {
                Ok(sym)
            } else {
                Err(SpecError::UnknownSymbol { symbol: s.to_string(), context: ctx.to_string() })
            }
        };
        let equation = SymEquation {
            lhs: rd.exprs(&f.equation.lhs_coeffs, "equation.lhsCoeffs", &none)?,
            rhs: rd.expr(&f.equation.rhs_coeff, "equation.rhsCoeff", &none)?,
            constant: rd.expr(&f.equation.constant, "equation.constant", &none)?,
        };
        let mut asm = AssumptionSet::new();
        for (s, v) in &f.assumptions.lower {
            asm.set_lower(known(s, "assumptions.lower")?, T::of(*v));
        }
        for s in &f.assumptions.odd {
            asm.set_parity(known(s, "assumptions.odd")?, Parity::Odd);
        }
        for s in &f.assumptions.even {
            asm.set_parity(known(s, "assumptions.even")?, Parity::Even);
        }
        for (a, b) in &f.assumptions.coprime {
            asm.add_coprime(known(a, "assumptions.coprime")?, known(b, "assumptions.coprime")?);
        }
        for fact in &f.assumptions.facts {
            asm.add_fact(rd.expr(fact, "assumptions.facts", &none)?);
        }
        let n = rd.expr(&f.n, "N", &none)?;
        let mut names = BTreeSet::new();
        let mut classes = Vec::new();
        for c in &f.classes {
            let mut members = Vec::new();
            for s in &c.sets {
                let set: SymbolicSet<T> = rd.set(s)?;
                if !names.insert(set.name.clone()) {
                    return Err(SpecError::DuplicateSet(set.name));
                }
                members.push(set);
            }
            classes.push(ColorClass { name: c.name.clone(), members });
        }
        let mut hints = Vec::new();
        for h in &f.hints {
            if !names.contains(&h.set) {
                return Err(SpecError::UnknownSet(h.set.clone()));
            }
            hints.push(Hint { set: h.set.clone(), divides: rd.expr(&h.divides, "hints.divides", &none)? });
        }
        Ok(ColoringSpec {
            name: f.name.clone(),
            description: f.description.clone(),
            equation,
            symbols,
            asm,
            n,
            classes,
            hints,
        })
    }

    pub fn to_file(&self) -> SpecFile {
        let s = |e: &SymExpr<T>| e.to_string();
        let all = |v: &[SymExpr<T>]| v.iter().map(s).collect::<Vec<_>>();
        let parity = |p: Parity| {
            self.asm.parities().iter().filter(|(_, q)| **q == p).map(|(k, _)| k.to_string()).collect()
        };
        let assumptions = AssumptionsFile {
            lower: self.asm.lower_bounds().iter().map(|(k, v)| (k.to_string(), v.to_i64().expect("bound fits"))).collect(),
            odd: parity(Parity::Odd),
            even: parity(Parity::Even),
            coprime: self.asm.coprime_pairs().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            facts: all(self.asm.facts()),
        };
        let set = |m: &SymbolicSet<T>| match &m.shape {
            SetShape::Interval(i) => SetFile::Interval {
                name: m.name.clone(),
                lower: s(&i.lower),
                upper: s(&i.upper),
                div: all(&i.div),
                ndiv: all(&i.ndiv),
            },
            SetShape::Format(f) => SetFile::Format {
                name: m.name.clone(),
                indices: f
                    .indices
                    .iter()
                    .map(|v| IndexFile { name: v.name.to_string(), lower: s(&v.lower), upper: s(&v.upper) })
                    .collect(),
                expr: s(&f.expr),
                div: all(&f.div),
                ndiv: all(&f.ndiv),
                residue_filter: f.residue.as_ref().map(|r| ResidueFile { modulus: s(&r.modulus), combo: s(&r.combo) }),
                exclude: f
                    .exclude
                    .iter()
                    .map(|x| match &x.witness {
                        None => ExcludeFile::Value(s(&x.value)),
                        Some(w) => ExcludeFile::Witnessed {
                            value: s(&x.value),
                            witness: w.iter().map(|(k, v)| (k.to_string(), s(v))).collect(),
                        },
                    })
                    .collect(),
                injective: (f.injectivity == Injectivity::Declared).then(|| "declared".to_string()),
            },
        };
        SpecFile {
            name: self.name.clone(),
            description: self.description.clone(),
            equation: EquationFile {
                lhs_coeffs: all(&self.equation.lhs),
                rhs_coeff: s(&self.equation.rhs),
                constant: s(&self.equation.constant),
            },
            symbols: self.symbols.iter().map(|x| x.to_string()).collect(),
            assumptions,
            n: s(&self.n),
            classes: self
                .classes
                .iter()
                .map(|c| ClassFile { name: c.name.clone(), sets: c.members.iter().map(set).collect() })
                .collect(),
            hints: self.hints.iter().map(|h| HintFile { set: h.set.clone(), divides: s(&h.divides) }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serializes")
    }

    pub fn set(&self, name: &str) -> Option<&SymbolicSet<T>> {
        self.sets().find(|s| s.name == name)
    }

    pub fn sets(&self) -> impl Iterator<Item = &SymbolicSet<T>> {
        self.classes.iter().flat_map(|c| c.members.iter())
    }

    /// Concrete coloring of `[1, N]` at `env`: `colors[t - 1]` is the class
    /// index of `t`, `None` where no set claims `t`.
    pub fn coloring(&self, env: &Bindings<T>) -> Result<Vec<Option<usize>>, SpecError>
    where
        T: ToPrimitive,
    {
        let n = self.n.eval(env)?.to_usize().ok_or_else(|| SpecError::Overflow(self.n.to_string()))?;
        let mut colors = vec![None; n];
        for (c, class) in self.classes.iter().enumerate() {
            for set in &class.members {
                let elems = set.instantiate(env).map_err(|e| SpecError::Expr { field: set.name.clone(), message: e.to_string() })?;
                for v in elems {
                    if let Some(t) = v.to_usize().filter(|&t| (1..=n).contains(&t)) {
                        colors[t - 1] = Some(c);
                    }
                }
            }
        }
        Ok(colors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{
        "name": "toy",
        "equation": {"lhsCoeffs": ["a", "1"], "rhsCoeff": "1"},
        "symbols": ["a"],
        "assumptions": {"lower": {"a": 1}},
        "N": "2*a",
        "classes": [
            {"name": "low", "sets": [{"kind": "interval", "name": "L", "lower": "1", "upper": "a"}]},
            {"name": "high", "sets": [{"kind": "format", "name": "H", "indices": [{"name": "i", "lower": "1", "upper": "a"}], "expr": "a + i", "injective": "declared"}]}
        ],
        "hints": [{"set": "H", "divides": "1"}]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let spec: ColoringSpec<i64> = ColoringSpec::from_json(TOY).unwrap();
        assert_eq!(spec.classes.len(), 2);
        assert_eq!(spec.equation.arity(), 3);
        let env: Bindings<i64> = [(Symbol::new("a"), 3)].into_iter().collect();
        assert_eq!(spec.equation.instantiate(&env).unwrap(), LinearEquation::three(3, 1, 1));
        assert_eq!(spec.coloring(&env).unwrap(), vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]);
        let again: ColoringSpec<i64> = ColoringSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_undeclared_symbols() {
        let bad = TOY.replace("\"upper\": \"a\"}]}", "\"upper\": \"b\"}]}");
        assert!(matches!(ColoringSpec::<i64>::from_json(&bad), Err(SpecError::UnknownSymbol { .. })));
        let bad = TOY.replace("\"set\": \"H\"", "\"set\": \"Q\"");
        assert!(matches!(ColoringSpec::<i64>::from_json(&bad), Err(SpecError::UnknownSet(_))));
    }
}
