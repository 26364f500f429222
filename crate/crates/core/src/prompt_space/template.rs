//! Instruction templates with elidable slots.
//!
//! Pattern syntax:
//!
//! * `{status}`, `{career}`, `{persona}`: slot placeholders. Each must appear
//!   exactly once. `{career|person}` renders `person` when the slot is empty.
//! * `[ ... ]`: optional fragment holding exactly one slot placeholder; the
//!   whole fragment disappears when that slot is empty. Fragments do not nest.
//! * `{a}`: indefinite article, rendered as `a` or `an` from the next word.
//!
//! After substitution, runs of spaces collapse to one and spaces before
//! punctuation are dropped.

use crate::error::{Error, Result};

use super::{Axis, SemanticConfig};

const ARTICLE_MARK: char = '\u{1}';

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Literal(String),
    Slot { axis: Axis, default: Option<String> },
    Article,
    Optional(Vec<Token>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    id: String,
    pattern: String,
    tokens: Vec<Token>,
}

impl PromptTemplate {
    pub fn parse(id: impl Into<String>, pattern: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let pattern = pattern.into();
        let tokens = parse_tokens(&pattern).map_err(|reason| Error::MalformedTemplate {
            template: id.clone(),
            reason,
        })?;
        Ok(PromptTemplate {
            id,
            pattern,
            tokens,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    pub fn render(&self, config: &SemanticConfig) -> String {
        let mut raw = String::with_capacity(self.pattern.len() + 32);
        render_tokens(&self.tokens, config, &mut raw);
        normalize(&resolve_articles(&raw))
    }
}

fn parse_tokens(pattern: &str) -> std::result::Result<Vec<Token>, String> {
    let mut top: Vec<Token> = Vec::new();
    let mut optional: Option<Vec<Token>> = None;
    let mut literal = String::new();
    let mut seen = [0usize; 3];
    let mut chars = pattern.chars();

    fn flush(literal: &mut String, into: &mut Vec<Token>) {
        if !literal.is_empty() {
            into.push(Token::Literal(std::mem::take(literal)));
        }
    }

    while let Some(c) = chars.next() {
        match c {
            '{' => {
                let mut body = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some('{') | Some('[') | Some(']') | None => {
                            return Err("unterminated placeholder".into())
                        }
                        Some(ch) => body.push(ch),
                    }
                }
                let target = optional.as_mut().unwrap_or(&mut top);
                flush(&mut literal, target);
                let token = if body == "a" {
                    Token::Article
                } else {
                    let (name, default) = match body.split_once('|') {
                        Some((n, d)) => (n, Some(d.to_string())),
                        None => (body.as_str(), None),
                    };
                    let axis = Axis::parse(name.trim())
                        .ok_or_else(|| format!("unknown placeholder `{{{body}}}`"))?;
                    seen[axis as usize] += 1;
                    Token::Slot { axis, default }
                };
                target.push(token);
            }
            '[' => {
                if optional.is_some() {
                    return Err("optional fragments cannot nest".into());
                }
                flush(&mut literal, &mut top);
                optional = Some(Vec::new());
            }
            ']' => {
                let mut inner = optional.take().ok_or("unbalanced `]`")?;
                flush(&mut literal, &mut inner);
                let slots = inner
                    .iter()
                    .filter(|t| matches!(t, Token::Slot { .. }))
                    .count();
                if slots != 1 {
                    return Err(format!(
                        "optional fragment must hold exactly one slot, found {slots}"
                    ));
                }
                top.push(Token::Optional(inner));
            }
            '}' => return Err("unbalanced `}`".into()),
            _ => literal.push(c),
        }
    }
    if optional.is_some() {
        return Err("unterminated optional fragment".into());
    }
    flush(&mut literal, &mut top);

    for axis in Axis::ALL {
        match seen[axis as usize] {
            1 => {}
            0 => return Err(format!("missing `{{{axis}}}` placeholder")),
            n => return Err(format!("`{{{axis}}}` placeholder appears {n} times")),
        }
    }
    Ok(top)
}

fn render_tokens(tokens: &[Token], config: &SemanticConfig, out: &mut String) {
    for token in tokens {
        match token {
            Token::Literal(s) => out.push_str(s),
            Token::Article => out.push(ARTICLE_MARK),
            Token::Slot { axis, default } => match (config.slot(*axis), default) {
                (Some(d), _) => out.push_str(&d.surface),
                (None, Some(fallback)) => out.push_str(fallback),
                (None, None) => {}
            },
            Token::Optional(inner) => {
                let filled = inner.iter().any(|t| match t {
                    Token::Slot { axis, .. } => config.slot(*axis).is_some(),
                    _ => false,
                });
                if filled {
                    render_tokens(inner, config, out);
                }
            }
        }
    }
}

fn resolve_articles(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len() + 8);
    for (i, c) in raw.char_indices() {
        if c != ARTICLE_MARK {
            out.push(c);
            continue;
        }
        let next = raw[i + c.len_utf8()..]
            .chars()
            .find(|ch| ch.is_alphanumeric());
        let vowel = matches!(next, Some(ch) if "aeiouAEIOU".contains(ch));
        out.push_str(if vowel { "an" } else { "a" });
    }
    out
}

fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c == ' ' && (out.is_empty() || out.ends_with(' ')) {
            continue;
        }
        if ".,;:!?".contains(c) && out.ends_with(' ') {
            out.pop();
        }
        out.push(c);
    }
    out.trim_end().to_string()
}
