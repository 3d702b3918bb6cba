//! The body-spec mini-language.
//!
//! ```text
//! spec := lp:<p>:<n> | cone:<spec> | prism:<spec> | profile:<file.json>:<spec>
//!       | smoothed:<spec>:<eps> | seg
//! ```
//!
//! Tokens are separated by `:`. Layer prefixes read outside-in, so
//! `cone:lp:2:2` is the doubled cone over the disk. `smoothed` may only
//! appear outermost.

use std::fmt;
use std::path::{Path, PathBuf};

use simplexforge::{extend_layer, make_lp_ball, GaugeBody, LayeredBody, Profile, SmoothedBody};

/// A parse failure, located at the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub position: usize,
    pub token: String,
    pub message: String,
    /// The failure came from reading a profile file rather than the spec.
    pub io: bool,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "body spec, position {} ('{}'): {}", self.position, self.token, self.message)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone)]
pub enum Body {
    Layered(LayeredBody),
    Smoothed(SmoothedBody),
}

impl Body {
    pub fn gauge(&self) -> &dyn GaugeBody {
        match self {
            Body::Layered(b) => b,
            Body::Smoothed(b) => b,
        }
    }

    pub fn layered(&self) -> Option<&LayeredBody> {
        match self {
            Body::Layered(b) => Some(b),
            Body::Smoothed(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.gauge().dim()
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    pos: usize,
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    next: usize,
    end: usize,
    base_dir: PathBuf,
}

impl<'a> Parser<'a> {
    fn err(&self, tok: Option<&Token<'a>>, message: impl Into<String>) -> SpecError {
        SpecError {
            position: tok.map_or(self.end, |t| t.pos),
            token: tok.map_or(String::new(), |t| t.text.to_string()),
            message: message.into(),
            io: false,
        }
    }

    fn take(&mut self, what: &str) -> Result<Token<'a>, SpecError> {
        if self.next >= self.tokens.len() {
            return Err(self.err(None, format!("expected {what}, found end of spec")));
        }
        self.next += 1;
        Ok(self.tokens[self.next - 1])
    }

    fn number(&mut self, what: &str) -> Result<(f64, usize), SpecError> {
        let tok = self.take(what)?;
        let v = match tok.text {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            s => s
                .parse::<f64>()
                .map_err(|_| self.err(Some(&tok), format!("malformed number for {what}")))?,
        };
        if v.is_nan() {
            return Err(self.err(Some(&tok), format!("malformed number for {what}")));
        }
        Ok((v, tok.pos))
    }

    fn layered(&mut self) -> Result<LayeredBody, SpecError> {
        let tok = self.take("a body kind")?;
        let (kind, pos) = (tok.text, tok.pos);
        let at = |message: String| SpecError {
            position: pos,
            token: kind.to_string(),
            message,
            io: false,
        };
        match kind {
            "seg" => Ok(LayeredBody::base()),
            "lp" => {
                let (p, p_pos) = self.number("the exponent p")?;
                if p < 1.0 {
                    return Err(SpecError {
                        position: p_pos,
                        token: self.tokens[self.next - 1].text.to_string(),
                        message: format!("p < 1 (got {p}): not a norm"),
                        io: false,
                    });
                }
                let n_tok = self.take("the dimension n")?;
                let n: usize = n_tok
                    .text
                    .parse()
                    .ok()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| self.err(Some(&n_tok), "dimension must be a positive integer"))?;
                make_lp_ball(p, n).map_err(|e| at(e.to_string()))
            }
            "cone" | "prism" => {
                let inner = self.layered()?;
                let profile = if kind == "cone" { Profile::cone() } else { Profile::prism() };
                extend_layer(inner, profile).map_err(|e| at(e.to_string()))
            }
            "profile" => {
                let file = self.take("a profile file")?;
                let (file_text, file_pos) = (file.text, file.pos);
                let path = resolve(&self.base_dir, file_text);
                let profile = Profile::from_json_file(&path).map_err(|e| SpecError {
                    position: file_pos,
                    token: file_text.to_string(),
                    message: e.to_string(),
                    io: !path.is_file(),
                })?;
                let inner = self.layered()?;
                extend_layer(inner, profile).map_err(|e| SpecError {
                    position: file_pos,
                    token: file_text.to_string(),
                    message: e.to_string(),
                    io: false,
                })
            }
            "smoothed" => Err(at("smoothed must be the outermost constructor".into())),
            other => Err(at(format!("unknown body kind '{other}'"))),
        }
    }
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses a spec, resolving relative profile paths against the current
/// directory.
pub fn parse_body_spec(spec: &str) -> Result<Body, SpecError> {
    parse_body_spec_in(spec, Path::new("."))
}

/// Parses a spec, resolving relative profile paths against `base_dir`.
pub fn parse_body_spec_in(spec: &str, base_dir: &Path) -> Result<Body, SpecError> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    for text in spec.split(':') {
        tokens.push(Token { text, pos });
        pos += text.len() + 1;
    }
    let mut parser = Parser {
        tokens,
        next: 0,
        end: spec.len(),
        base_dir: base_dir.to_path_buf(),
    };
    if spec.trim().is_empty() {
        return Err(parser.err(None, "empty body spec"));
    }
    let body = if parser.tokens[0].text == "smoothed" {
        parser.next = 1;
        let core = parser.layered()?;
        let (eps, eps_pos) = parser.number("the smoothing radius")?;
        let eps_tok = parser.tokens[parser.next - 1].text.to_string();
        let smoothed = SmoothedBody::new(core, eps).map_err(|e| SpecError {
            position: eps_pos,
            token: eps_tok,
            message: e.to_string(),
            io: false,
        })?;
        Body::Smoothed(smoothed)
    } else {
        Body::Layered(parser.layered()?)
    };
    if parser.next < parser.tokens.len() {
        let tok = parser.tokens[parser.next];
        return Err(parser.err(Some(&tok), "unexpected trailing token"));
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let b = parse_body_spec("lp:2:3").unwrap();
        assert_eq!(b.dim(), 3);
        assert!((b.gauge().eval(&[1.0, 2.0, 2.0]) - 3.0).abs() < 1e-15);

        let cone = parse_body_spec("cone:lp:2:2").unwrap();
        assert_eq!(cone.layered().unwrap().spec_string(), "cone:lp:2:2");
        assert_eq!(cone.gauge().eval(&[0.0, 0.0, 1.0]), 1.0);

        let e = parse_body_spec("lp:0.5:2").unwrap_err();
        assert!(e.message.contains("p < 1"), "{e}");
        assert_eq!(e.position, 3);
    }

    #[test]
    fn square_and_infinity() {
        let sq = parse_body_spec("prism:seg").unwrap();
        assert_eq!(sq.gauge().eval(&[0.5, -2.0]), 2.0);
        let cube = parse_body_spec("lp:inf:3").unwrap();
        assert_eq!(cube.gauge().eval(&[0.3, -1.0, 0.7]), 1.0);
    }

    #[test]
    fn smoothed_specs() {
        let b = parse_body_spec("smoothed:cone:lp:2:2:0.1").unwrap();
        assert!(matches!(b, Body::Smoothed(_)));
        assert!((b.gauge().eval(&[0.0, 0.0, 1.1]) - 1.0).abs() < 1e-12);
        let e = parse_body_spec("cone:smoothed:lp:2:2:0.1").unwrap_err();
        assert_eq!(e.position, 5);
        assert!(parse_body_spec("smoothed:cone:lp:2:2").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_body_spec("cone:blob:2").unwrap_err();
        assert_eq!((e.position, e.token.as_str()), (5, "blob"));
        assert!(e.message.contains("unknown body kind"));

        let e = parse_body_spec("lp:2:x").unwrap_err();
        assert_eq!(e.position, 5);
        let e = parse_body_spec("lp:two:2").unwrap_err();
        assert!(e.message.contains("malformed number"));
        assert_eq!(e.position, 3);
        let e = parse_body_spec("lp:2:2:extra").unwrap_err();
        assert_eq!((e.position, e.token.as_str()), (7, "extra"));
        let e = parse_body_spec("cone:").unwrap_err();
        assert_eq!(e.position, 5);
        let e = parse_body_spec("cone").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(parse_body_spec("").is_err());
    }

    #[test]
    fn profile_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("p.json"),
            r#"{"t_max": 1.0, "samples": [[0, 1], [0.5, 0.5], [1, 0]]}"#,
        )
        .unwrap();
        let b = parse_body_spec_in("profile:p.json:lp:2:2", dir.path()).unwrap();
        assert!((b.gauge().eval(&[0.25, 0.0, 0.5]) - 0.75).abs() < 1e-13);

        let e = parse_body_spec_in("profile:missing.json:seg", dir.path()).unwrap_err();
        assert!(e.io);
        assert_eq!(e.position, 8);

        std::fs::write(dir.path().join("bad.json"), r#"{"t_max": 1.0, "samples": [[0, 1], [1, 2]]}"#).unwrap();
        let e = parse_body_spec_in("profile:bad.json:seg", dir.path()).unwrap_err();
        assert!(!e.io);
        assert!(e.message.contains("invalid profile"), "{e}");
    }
}
