use std::fmt;
use std::str::FromStr;

use super::SemanticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atomic {
    S,
    N,
    NP,
    PP,
}

impl Atomic {
    fn as_str(self) -> &'static str {
        match self {
            Atomic::S => "S",
            Atomic::N => "N",
            Atomic::NP => "NP",
            Atomic::PP => "PP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slash {
    /// `/`: argument to the right.
    Forward,
    /// `\`: argument to the left.
    Backward,
}

/// A CCG category whose argument slots may carry a thematic-role label, e.g.
/// `(S\NP:R1)/NP:R2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CcgCategory {
    Atom(Atomic),
    Functor {
        result: Box<CcgCategory>,
        slash: Slash,
        arg: Box<CcgCategory>,
        role: Option<String>,
    },
}

impl CcgCategory {
    /// The same category with every role label removed.
    pub fn strip_roles(&self) -> CcgCategory {
        match self {
            CcgCategory::Atom(a) => CcgCategory::Atom(*a),
            CcgCategory::Functor {
                result, slash, arg, ..
            } => CcgCategory::Functor {
                result: Box::new(result.strip_roles()),
                slash: *slash,
                arg: Box::new(arg.strip_roles()),
                role: None,
            },
        }
    }

    /// Equality ignoring role labels.
    pub fn matches(&self, other: &CcgCategory) -> bool {
        self.strip_roles() == other.strip_roles()
    }

    /// Role labels in outermost-last order of appearance (innermost first).
    pub fn roles(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_roles(&mut out);
        out
    }

    fn collect_roles<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let CcgCategory::Functor {
            result, arg, role, ..
        } = self
        {
            result.collect_roles(out);
            arg.collect_roles(out);
            if let Some(r) = role {
                out.push(r);
            }
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, CcgCategory::Atom(_))
    }
}

impl fmt::Display for CcgCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CcgCategory::Atom(a) => f.write_str(a.as_str()),
            CcgCategory::Functor {
                result,
                slash,
                arg,
                role,
            } => {
                if result.is_atom() {
                    write!(f, "{result}")?;
                } else {
                    write!(f, "({result})")?;
                }
                f.write_str(match slash {
                    Slash::Forward => "/",
                    Slash::Backward => "\\",
                })?;
                if arg.is_atom() {
                    write!(f, "{arg}")?;
                } else {
                    write!(f, "({arg})")?;
                }
                if let Some(r) = role {
                    write!(f, ":{r}")?;
                }
                Ok(())
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> SemanticsError {
        SemanticsError::Category(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn category(&mut self) -> Result<CcgCategory, SemanticsError> {
        let mut left = self.primary()?;
        while let Some(c) = self.peek() {
            let slash = match c {
                '/' => Slash::Forward,
                '\\' => Slash::Backward,
                _ => break,
            };
            self.pos += 1;
            let arg = self.primary()?;
            let role = if self.peek() == Some(':') {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.err("empty role label"));
                }
                Some(self.src[start..self.pos].to_owned())
            } else {
                None
            };
            left = CcgCategory::Functor {
                result: Box::new(left),
                slash,
                arg: Box::new(arg),
                role,
            };
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<CcgCategory, SemanticsError> {
        if self.peek() == Some('(') {
            self.pos += 1;
            let inner = self.category()?;
            if self.peek() != Some(')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_uppercase()) {
            self.pos += 1;
        }
        let atom = match &self.src[start..self.pos] {
            "S" => Atomic::S,
            "N" => Atomic::N,
            "NP" => Atomic::NP,
            "PP" => Atomic::PP,
            "" => return Err(self.err("expected a category")),
            other => {
                return Err(SemanticsError::Category(format!(
                    "unknown atomic category `{other}` in `{}`",
                    self.src
                )))
            }
        };
        Ok(CcgCategory::Atom(atom))
    }
}

impl FromStr for CcgCategory {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let cat = p.category()?;
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(cat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> CcgCategory {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        for s in ["S\\NP", "(S\\NP)/NP", "NP/N", "N/N", "(N\\N)/NP", "PP/NP", "N", "S\\NP:R1", "(S\\NP:R1)/NP:R2"] {
            assert_eq!(cat(s).to_string(), s);
        }
        // Slashes associate to the left.
        assert_eq!(cat("S\\NP/NP"), cat("(S\\NP)/NP"));
    }

    #[test]
    fn roles_and_matching() {
        let c = cat("(S\\NP:R1)/NP:R2");
        assert_eq!(c.roles(), ["R1", "R2"]);
        assert!(c.matches(&cat("(S\\NP)/NP")));
        assert!(!c.matches(&cat("S\\NP")));
        assert!(cat("S\\NP").roles().is_empty());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "X", "S\\", "(S\\NP", "S\\NP)", "S\\NP:", "s"] {
            assert!(s.parse::<CcgCategory>().is_err(), "{s}");
        }
    }
}
