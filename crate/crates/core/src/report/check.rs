//! Structural well-formedness check for the SVG subset the charts emit.

/// Single `<svg>` root, properly nested and closed tags, quoted attribute
/// values, nothing but whitespace or an XML declaration outside the root,
/// and only the predefined or numeric entities.
pub fn check_svg(text: &str) -> Result<(), String> {
    let bytes = text.as_bytes();
    let mut stack: Vec<&str> = Vec::new();
    let mut roots = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            let close = find(text, i, ">").ok_or_else(|| format!("unterminated tag at byte {i}"))?;
            let inner = &text[i + 1..close];
            if let Some(decl) = inner.strip_prefix('?') {
                if i != 0 || !decl.ends_with('?') {
                    return Err("XML declaration must open the document".into());
                }
            } else if inner.starts_with("!--") {
                let end = find(text, i, "-->").ok_or("unterminated comment")?;
                i = end + 3;
                continue;
            } else if let Some(name) = inner.strip_prefix('/') {
                let name = name.trim_end();
                match stack.pop() {
                    Some(open) if open == name => {}
                    Some(open) => return Err(format!("</{name}> closes <{open}>")),
                    None => return Err(format!("stray </{name}>")),
                }
            } else {
                let self_closing = inner.ends_with('/');
                let body = inner.trim_end_matches('/');
                let name_end = body.find(|c: char| c.is_whitespace()).unwrap_or(body.len());
                let name = &body[..name_end];
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == ':') {
                    return Err(format!("bad tag name {name:?}"));
                }
                check_attributes(&body[name_end..]).map_err(|e| format!("<{name}>: {e}"))?;
                if stack.is_empty() {
                    roots += 1;
                    if name != "svg" || roots > 1 {
                        return Err(format!("unexpected top-level <{name}>"));
                    }
                }
                if !self_closing {
                    stack.push(name);
                }
            }
            i = close + 1;
        } else {
            let next = text[i..].find('<').map_or(bytes.len(), |o| i + o);
            let chunk = &text[i..next];
            if stack.is_empty() && !chunk.trim().is_empty() {
                return Err("text outside the root element".into());
            }
            check_entities(chunk)?;
            i = next;
        }
    }
    if let Some(open) = stack.pop() {
        return Err(format!("<{open}> never closed"));
    }
    if roots != 1 {
        return Err("missing <svg> root".into());
    }
    Ok(())
}

fn find(text: &str, from: usize, pat: &str) -> Option<usize> {
    text[from..].find(pat).map(|o| from + o)
}

fn check_attributes(mut s: &str) -> Result<(), String> {
    let mut seen: Vec<&str> = Vec::new();
    loop {
        s = s.trim_start();
        if s.is_empty() {
            return Ok(());
        }
        let eq = s
            .find('=')
            .ok_or_else(|| format!("attribute without value near {s:?}"))?;
        let name = s[..eq].trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(format!("bad attribute name {name:?}"));
        }
        if seen.contains(&name) {
            return Err(format!("duplicate attribute {name}"));
        }
        seen.push(name);
        let rest = s[eq + 1..].trim_start();
        let quote = rest
            .chars()
            .next()
            .filter(|c| *c == '"' || *c == '\'')
            .ok_or("unquoted attribute value")?;
        let end = rest[1..].find(quote).ok_or("unterminated attribute value")? + 1;
        let value = &rest[1..end];
        if value.contains('<') {
            return Err("'<' inside attribute value".into());
        }
        check_entities(value)?;
        s = &rest[end + 1..];
    }
}

fn check_entities(s: &str) -> Result<(), String> {
    let mut rest = s;
    while let Some(p) = rest.find('&') {
        let after = &rest[p + 1..];
        let end = after.find(';').ok_or("unterminated entity")?;
        let name = &after[..end];
        let ok = matches!(name, "amp" | "lt" | "gt" | "quot" | "apos")
            || name.strip_prefix('#').is_some_and(|n| {
                n.strip_prefix('x').map_or(n.chars().all(|c| c.is_ascii_digit()), |h| {
                    h.chars().all(|c| c.is_ascii_hexdigit())
                }) && !n.is_empty()
            });
        if !ok {
            return Err(format!("unknown entity &{name};"));
        }
        rest = &after[end + 1..];
    }
    Ok(())
}
