use super::DslError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Eq,
    Caret,
    Pipe,
    Colon,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Num(v) => format!("number {v}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::Caret => "'^'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Colon => "':'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits source text into tokens. `#` starts a comment running to the end
/// of the line. Columns count characters, starting at 1.
pub(super) fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '^' => Some(Tok::Caret),
            '|' => Some(Tok::Pipe),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, pos });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
            let start = i;
            let len = scan_number(&chars[i..]);
            if len == 0 {
                return Err(syntax(pos, &["number"], &format!("'{c}'")));
            }
            i += len;
            col += len;
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(pos, &["number"], &format!("'{text}'")))?;
            if !v.is_finite() {
                return Err(syntax(pos, &["finite number"], &format!("'{text}'")));
            }
            out.push(Token { tok: Tok::Num(v), pos });
            continue;
        }
        return Err(syntax(pos, &["operation", "'('", "'^'", "'|'"], &format!("{c:?}")));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

/// Length of the longest number prefix: `[+-]? digits? ('.' digits?)? ([eE] [+-]? digits)?`
/// with at least one mantissa digit. Zero when there is none.
fn scan_number(s: &[char]) -> usize {
    let mut i = 0;
    if i < s.len() && (s[i] == '-' || s[i] == '+') {
        i += 1;
    }
    let mut digits = 0;
    while i < s.len() && s[i].is_ascii_digit() {
        i += 1;
        digits += 1;
    }
    if i < s.len() && s[i] == '.' {
        i += 1;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return 0;
    }
    if i < s.len() && (s[i] == 'e' || s[i] == 'E') {
        let mut j = i + 1;
        if j < s.len() && (s[j] == '-' || s[j] == '+') {
            j += 1;
        }
        let exp_start = j;
        while j < s.len() && s[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    i
}

pub(super) fn syntax(pos: Pos, expected: &[&str], found: &str) -> DslError {
    DslError::Syntax {
        line: pos.line,
        col: pos.col,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("a(x=U(-1,2.5e1)) ^ b():3 | identity"),
            vec![
                Tok::Ident("a".into()),
                Tok::LParen,
                Tok::Ident("x".into()),
                Tok::Eq,
                Tok::Ident("U".into()),
                Tok::LParen,
                Tok::Num(-1.0),
                Tok::Comma,
                Tok::Num(25.0),
                Tok::RParen,
                Tok::RParen,
                Tok::Caret,
                Tok::Ident("b".into()),
                Tok::LParen,
                Tok::RParen,
                Tok::Colon,
                Tok::Num(3.0),
                Tok::Pipe,
                Tok::Ident("identity".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let t = tokenize("# header\n  hflip() # trailing\n^ vflip()").unwrap();
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(t[3].tok, Tok::Caret);
        assert_eq!(t[3].pos, Pos { line: 3, col: 1 });
    }

    #[test]
    fn bad_character() {
        match tokenize("hflip() & vflip()").unwrap_err() {
            DslError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 9)),
            e => panic!("{e}"),
        }
        assert!(tokenize("x=-").is_err());
        assert!(tokenize("1e999").is_err());
    }
}
