//! A small lexer shared by the declaration scanners.
//!
//! It drops comments and whitespace, keeps string literal contents (import
//! paths live there), and splits everything else into identifiers, numbers,
//! and single punctuation characters. It does not try to be a grammar.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Num,
    Punct(char),
}

impl Tok {
    pub fn ident(&self) -> Option<&str> {
        match self {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, c: char) -> bool {
        matches!(self, Tok::Punct(p) if *p == c)
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(self, Tok::Ident(s) if s == word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Rust,
    Go,
    TypeScript,
    Java,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    dialect: Dialect,
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

impl Lexer<'_> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn starts_with(&self, s: &[u8]) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn text(&self, from: usize, to: usize) -> String {
        String::from_utf8_lossy(&self.src[from..to.min(self.src.len())]).into_owned()
    }

    fn block_comment(&mut self) {
        // Rust block comments nest; the others do not.
        let nests = self.dialect == Dialect::Rust;
        let mut depth = 0usize;
        while self.pos < self.src.len() {
            if self.starts_with(b"/*") {
                depth += 1;
                self.pos += 2;
                if !nests && depth > 1 {
                    depth = 1;
                }
            } else if self.starts_with(b"*/") {
                depth -= 1;
                self.pos += 2;
                if depth == 0 {
                    return;
                }
            } else {
                self.pos += 1;
            }
        }
    }

    /// Quoted literal with backslash escapes, opening quote at `pos`.
    fn quoted(&mut self, quote: u8) -> String {
        self.pos += 1;
        let start = self.pos;
        while let Some(b) = self.peek(0) {
            if b == b'\\' {
                self.pos += 2;
            } else if b == quote {
                let s = self.text(start, self.pos);
                self.pos += 1;
                return s;
            } else if b == b'\n' && quote != b'`' && self.dialect != Dialect::Rust {
                break;
            } else {
                self.pos += 1;
            }
        }
        self.text(start, self.pos)
    }

    fn until(&mut self, close: &[u8]) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && !self.starts_with(close) {
            self.pos += 1;
        }
        let s = self.text(start, self.pos);
        self.pos = (self.pos + close.len()).min(self.src.len());
        s
    }

    /// Rust `r"..."`, `r#"..."#`, `br"..."` with `pos` on the `r`.
    fn rust_raw_string(&mut self) -> Option<String> {
        let mut i = self.pos + 1;
        let mut hashes = 0;
        while self.src.get(i) == Some(&b'#') {
            hashes += 1;
            i += 1;
        }
        if self.src.get(i) != Some(&b'"') {
            return None;
        }
        self.pos = i + 1;
        let mut close = vec![b'"'];
        close.extend(std::iter::repeat_n(b'#', hashes));
        Some(self.until(&close))
    }

    /// Rust `'`: char literal or lifetime.
    fn rust_quote(&mut self) -> Option<Tok> {
        let is_char = match (self.peek(1), self.peek(2)) {
            (Some(b'\\'), _) => true,
            (Some(_), Some(b'\'')) => true,
            _ => false,
        };
        if is_char {
            self.quoted(b'\'');
            return Some(Tok::Str(String::new()));
        }
        self.pos += 1;
        None
    }

    fn next_token(&mut self) -> Option<Tok> {
        loop {
            let b = self.peek(0)?;
            if b.is_ascii_whitespace() {
                self.pos += 1;
                continue;
            }
            if self.starts_with(b"//") {
                self.until(b"\n");
                continue;
            }
            if self.starts_with(b"/*") {
                self.block_comment();
                continue;
            }
            if self.dialect == Dialect::Rust && (b == b'r' || b == b'b') {
                let save = self.pos;
                if b == b'b' && self.peek(1) == Some(b'r') {
                    self.pos += 1;
                }
                if self.peek(0) == Some(b'r') {
                    if let Some(s) = self.rust_raw_string() {
                        return Some(Tok::Str(s));
                    }
                }
                self.pos = save;
                if b == b'b' && matches!(self.peek(1), Some(b'"') | Some(b'\'')) {
                    self.pos += 1;
                    let quote = self.peek(0)?;
                    return Some(Tok::Str(self.quoted(quote)));
                }
            }
            if self.dialect == Dialect::Java && self.starts_with(b"\"\"\"") {
                self.pos += 3;
                return Some(Tok::Str(self.until(b"\"\"\"")));
            }
            return Some(match b {
                b'"' => Tok::Str(self.quoted(b'"')),
                b'\'' if self.dialect == Dialect::Rust => match self.rust_quote() {
                    Some(tok) => tok,
                    None => continue,
                },
                b'\'' => Tok::Str(self.quoted(b'\'')),
                b'`' if self.dialect == Dialect::Go => {
                    self.pos += 1;
                    Tok::Str(self.until(b"`"))
                }
                b'`' if self.dialect == Dialect::TypeScript => Tok::Str(self.quoted(b'`')),
                _ if is_ident_start(b) => {
                    let start = self.pos;
                    while self.peek(0).is_some_and(is_ident_continue) {
                        self.pos += 1;
                    }
                    Tok::Ident(self.text(start, self.pos))
                }
                _ if b.is_ascii_digit() => {
                    while self
                        .peek(0)
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'.')
                    {
                        self.pos += 1;
                    }
                    Tok::Num
                }
                _ => {
                    self.pos += 1;
                    Tok::Punct(char::from(b))
                }
            });
        }
    }
}

pub fn tokenize(source: &[u8], dialect: Dialect) -> Vec<Tok> {
    let mut lexer = Lexer {
        src: source,
        pos: 0,
        dialect,
    };
    std::iter::from_fn(|| lexer.next_token()).collect()
}

/// Index of the token closing the bracket opened at `open`.
pub fn matching(tokens: &[Tok], open: usize, left: char, right: char) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if t.is_punct(left) {
            depth += 1;
        } else if t.is_punct(right) {
            depth = depth.checked_sub(1)?;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idents(src: &str, d: Dialect) -> Vec<String> {
        tokenize(src.as_bytes(), d)
            .into_iter()
            .filter_map(|t| t.ident().map(str::to_string))
            .collect()
    }

    #[test]
    fn comments_and_strings_are_not_identifiers() {
        let src = "// fn hidden()\n/* fn also() */ fn shown() { let s = \"fn nope()\"; }";
        assert_eq!(idents(src, Dialect::Rust), ["fn", "shown", "let", "s"]);
    }

    #[test]
    fn rust_nested_comment_raw_string_and_lifetime() {
        let src = "/* a /* b */ c */ fn f<'a>(x: &'a str) { let r = r#\"fn g()\"#; let c = '\"'; }";
        assert_eq!(
            idents(src, Dialect::Rust),
            ["fn", "f", "a", "x", "a", "str", "let", "r", "let", "c"]
        );
    }

    #[test]
    fn go_raw_string_is_one_token() {
        let toks = tokenize(b"import `fmt`", Dialect::Go);
        assert_eq!(toks, [Tok::Ident("import".into()), Tok::Str("fmt".into())]);
    }

    #[test]
    fn java_text_block() {
        let toks = tokenize(
            b"String s = \"\"\"\n  a \"quoted\" word\n\"\"\"; x",
            Dialect::Java,
        );
        assert_eq!(toks.last(), Some(&Tok::Ident("x".into())));
    }

    #[test]
    fn bracket_matching() {
        let toks = tokenize(b"f(a(b), c)", Dialect::Go);
        assert_eq!(matching(&toks, 1, '(', ')'), Some(toks.len() - 1));
    }
}
