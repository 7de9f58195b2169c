//! Text forms of group recipes and candidate families.
//!
//! Groups are whitespace-separated `key=value` tokens:
//! `kind=cyclic n=12`, `kind=symmetric n=4`, `kind=dihedral n=6`,
//! `kind=semidirect A=Z_5 B=Z_2 action=inversion` (also `A=Z_3xZ_3`,
//! `action=identity`, `action=multiply:2`).
//!
//! Families are `sdp`, `sym`, `prime:<p>`, `conjugates:<g>;<g>…` or
//! `explicit:<g>;<g>|<g>…`, where each `<g>` is an element in the group's
//! printed form and `|` separates generator sets.

use std::sync::Arc;

use cosetlab_core::group::{candidate_family, make_group, Action, CandidateFamily, FamilySpec, FiniteGroup, GroupRecipe};
use cosetlab_core::{Error, Result};

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_cyclic_factor(text: &str) -> Result<usize> {
    let digits = text
        .strip_prefix("Z_")
        .or_else(|| text.strip_prefix('Z'))
        .ok_or_else(|| usage(format!("expected Z_<n>, got {text:?}")))?;
    digits.parse().map_err(|_| usage(format!("bad cyclic order in {text:?}")))
}

pub fn parse_group(text: &str) -> Result<GroupRecipe> {
    let mut kind = None;
    let (mut n, mut base, mut twist, mut action) = (None, None, None, None);
    for token in text.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| usage(format!("group token {token:?} is not key=value")))?;
        match key {
            "kind" => kind = Some(value),
            "n" => n = Some(value.parse::<usize>().map_err(|_| usage(format!("bad n {value:?}")))?),
            "A" => base = Some(value.split('x').map(parse_cyclic_factor).collect::<Result<Vec<_>>>()?),
            "B" => twist = Some(parse_cyclic_factor(value)?),
            "action" => {
                action = Some(match value {
                    "identity" => Action::Identity,
                    "inversion" => Action::Inversion,
                    _ => {
                        let r = value
                            .strip_prefix("multiply:")
                            .and_then(|r| r.parse().ok())
                            .ok_or_else(|| usage(format!("unknown action {value:?}")))?;
                        Action::Multiply(r)
                    }
                })
            }
            _ => return Err(usage(format!("unknown group key {key:?}"))),
        }
    }
    let need_n = |n: Option<usize>| n.ok_or_else(|| usage("group kind needs n=<order>"));
    match kind {
        Some("cyclic") => Ok(GroupRecipe::Cyclic { n: need_n(n)? }),
        Some("symmetric") => Ok(GroupRecipe::Symmetric { n: need_n(n)? }),
        Some("dihedral") => Ok(GroupRecipe::Dihedral { n: need_n(n)? }),
        Some("semidirect") => Ok(GroupRecipe::Semidirect {
            base: base.ok_or_else(|| usage("semidirect group needs A=Z_<n>"))?,
            twist: twist.ok_or_else(|| usage("semidirect group needs B=Z_<p>"))?,
            action: action.ok_or_else(|| usage("semidirect group needs action=…"))?,
        }),
        Some(other) => Err(usage(format!("unknown group kind {other:?}"))),
        None => Err(usage("group needs kind=…")),
    }
}

pub fn build_group(text: &str, cap: usize) -> Result<Arc<FiniteGroup>> {
    let recipe = parse_group(text)?;
    Ok(Arc::new(make_group(&recipe, cap)?))
}

fn parse_elements(group: &FiniteGroup, text: &str) -> Result<Vec<usize>> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| group.parse_element(t))
        .collect()
}

pub fn parse_family(group: &FiniteGroup, text: &str) -> Result<FamilySpec> {
    let text = text.trim();
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    match head {
        "sdp" => Ok(FamilySpec::Sdp),
        "sym" | "sym_involution" => Ok(FamilySpec::SymInvolution),
        "prime" => Ok(FamilySpec::PrimeOrderAll {
            p: rest.parse().map_err(|_| usage(format!("bad prime in family {text:?}")))?,
        }),
        "conjugates" => Ok(FamilySpec::Conjugates {
            generators: parse_elements(group, rest)?,
        }),
        "explicit" => Ok(FamilySpec::Explicit {
            generator_sets: rest.split('|').map(|set| parse_elements(group, set)).collect::<Result<_>>()?,
        }),
        _ => Err(usage(format!("unknown family {text:?}"))),
    }
}

pub fn build_family(group: &Arc<FiniteGroup>, text: &str) -> Result<CandidateFamily> {
    let spec = parse_family(group, text)?;
    candidate_family(group, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_forms() {
        assert_eq!(parse_group("kind=dihedral n=6").unwrap(), GroupRecipe::Dihedral { n: 6 });
        assert_eq!(
            parse_group("kind=semidirect A=Z_5 B=Z_2 action=inversion").unwrap(),
            GroupRecipe::Semidirect {
                base: vec![5],
                twist: 2,
                action: Action::Inversion
            }
        );
        assert_eq!(
            parse_group("kind=semidirect A=Z_7 B=Z_3 action=multiply:2").unwrap(),
            GroupRecipe::Semidirect {
                base: vec![7],
                twist: 3,
                action: Action::Multiply(2)
            }
        );
        for bad in ["", "kind=cyclic", "kind=torus n=3", "n=3", "kind=cyclic n=x", "kind=semidirect A=Z_5"] {
            assert!(matches!(parse_group(bad), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn family_forms() {
        let s4 = build_group("kind=symmetric n=4", 4096).unwrap();
        assert_eq!(build_family(&s4, "sym").unwrap().len(), 3);
        assert_eq!(build_family(&s4, "prime:3").unwrap().len(), 4);
        assert_eq!(build_family(&s4, "conjugates:(1 2)").unwrap().len(), 6);
        assert_eq!(build_family(&s4, "explicit:(1 2)|(1 2 3);(1 2)").unwrap().len(), 2);
        assert!(build_family(&s4, "sdp").is_err());
        assert!(build_family(&s4, "bogus").is_err());
    }
}
