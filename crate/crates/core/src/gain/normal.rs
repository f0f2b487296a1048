//! Normal form: every gain expression equals a MAX of standard atoms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lang::ast::{BinOp, Expr, Gain};
use crate::lang::transform::{fold, subst_gain};

/// Upper bound on the number of atoms an expansion may produce.
pub const MAX_ATOMS: usize = 100_000;

/// A non-empty list of standard expressions, read as their MAX.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub atoms: Vec<Expr>,
}

impl NormalForm {
    pub fn to_gain(&self) -> Gain {
        if self.atoms.len() == 1 {
            Gain::Atom(self.atoms[0].clone())
        } else {
            Gain::Max(self.atoms.iter().cloned().map(Gain::Atom).collect())
        }
    }
}

fn atoms(g: &Gain) -> Result<Vec<Expr>> {
    Ok(match g {
        Gain::Atom(e) => vec![fold(e)],
        Gain::Max(v) => {
            let mut out = Vec::new();
            for x in v {
                out.extend(atoms(x)?);
                if out.len() > MAX_ATOMS {
                    return Err(Error::NormalFormTooLarge(MAX_ATOMS));
                }
            }
            out
        }
        Gain::Plus(v) => {
            let mut acc = vec![Expr::Int(0)];
            for x in v {
                let next = atoms(x)?;
                if acc.len().saturating_mul(next.len()) > MAX_ATOMS {
                    return Err(Error::NormalFormTooLarge(MAX_ATOMS));
                }
                acc = acc
                    .iter()
                    .flat_map(|a| next.iter().map(move |b| fold(&Expr::bin(BinOp::Add, a.clone(), b.clone()))))
                    .collect();
            }
            acc
        }
        Gain::And(c, b) => atoms(b)?
            .into_iter()
            .map(|a| fold(&Expr::bin(BinOp::Mul, c.clone(), a)))
            .collect(),
        Gain::QuantMax { var, set, body } => {
            if set.is_empty() {
                return Err(Error::RangeEmpty(format!("MAX {var}")));
            }
            let mut out = Vec::new();
            for v in set.values() {
                let mut m = HashMap::new();
                m.insert(var.clone(), Expr::Int(v));
                out.extend(atoms(&subst_gain(body, &m))?);
                if out.len() > MAX_ATOMS {
                    return Err(Error::NormalFormTooLarge(MAX_ATOMS));
                }
            }
            out
        }
    })
}

/// Expands quantifiers and distributes `PLUS` and `AND` through `MAX`.
pub fn normalize(g: &Gain) -> Result<NormalForm> {
    let mut out: Vec<Expr> = Vec::new();
    for a in atoms(g)? {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(NormalForm { atoms: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_decls, parse_gain};
    use crate::lang::printer::expr_to_string;

    fn nf(src: &str) -> Vec<String> {
        let d = parse_decls("hidden a, b: bool; hidden x: int[0..9];").unwrap();
        normalize(&parse_gain(src, &d).unwrap()).unwrap().atoms.iter().map(expr_to_string).collect()
    }

    #[test]
    fn distribution_laws() {
        assert_eq!(
            nf("[a] PLUS ([not a and b] MAX [not a and not b])"),
            ["[a] + [not a and b]", "[a] + [not a and not b]"]
        );
        assert_eq!(nf("[not a] AND ([b] MAX [not b])"), ["[not a and b]", "[not a and not b]"]);
        assert_eq!(nf("[a] MAX 0"), ["[a]", "0"]);
        assert_eq!(nf("MAX n in 0..2: [x div 2 = n]").len(), 3);
    }
}
