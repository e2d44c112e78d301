//! ASCII map documents.
//!
//! ```text
//! ....#....
//! ....#....
//! .........
//! ROOMS:
//! a=Kitchen
//! b=Office
//! aaaa#bbbb
//! aaaa#bbbb
//! aaaaabbbb
//! ```
//!
//! The walkability grid comes first (`.` walkable, `#` blocked). An optional
//! `ROOMS:` line starts the room section: `glyph=Name` entries followed by a
//! glyph grid of the same shape, where `a`-`z` assign a room and `.`/`#`
//! leave the cell unlabelled.

use super::{EnvError, GridMap};

pub fn load_map(text: &str) -> Result<GridMap, EnvError> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let mut rows: Vec<&str> = Vec::new();
    let mut has_rooms = false;
    for line in lines.by_ref() {
        if line.trim_end() == "ROOMS:" {
            has_rooms = true;
            break;
        }
        if line.is_empty() {
            continue;
        }
        rows.push(line);
    }
    let (width, height) = grid_shape(&rows)?;
    let mut walkable = Vec::with_capacity(width * height);
    for (y, row) in rows.iter().enumerate() {
        for (x, glyph) in row.chars().enumerate() {
            walkable.push(match glyph {
                '.' => true,
                '#' => false,
                other => {
                    return Err(EnvError::MalformedMap(format!(
                        "unknown glyph {other:?} at ({x}, {y})"
                    )))
                }
            });
        }
    }
    let map = GridMap::from_walkable(width, height, walkable)?;
    if !has_rooms {
        return Ok(map);
    }

    let mut names: Vec<String> = Vec::new();
    let mut glyphs: Vec<char> = Vec::new();
    let mut room_rows: Vec<&str> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if let Some((glyph, name)) = line.split_once('=') {
            let mut chars = glyph.chars();
            let (Some(g), None) = (chars.next(), chars.next()) else {
                return Err(EnvError::MalformedMap(format!("bad room entry {line:?}")));
            };
            if !g.is_ascii_lowercase() || name.trim().is_empty() {
                return Err(EnvError::MalformedMap(format!("bad room entry {line:?}")));
            }
            if glyphs.contains(&g) {
                return Err(EnvError::MalformedMap(format!("room glyph {g:?} declared twice")));
            }
            glyphs.push(g);
            names.push(name.trim().to_string());
        } else {
            room_rows.push(line);
        }
    }
    let (rw, rh) = grid_shape(&room_rows)?;
    if (rw, rh) != (width, height) {
        return Err(EnvError::MalformedMap(format!(
            "room grid is {rw}x{rh}, walkability grid is {width}x{height}"
        )));
    }
    let mut room_of = Vec::with_capacity(width * height);
    for (y, row) in room_rows.iter().enumerate() {
        for (x, glyph) in row.chars().enumerate() {
            room_of.push(match glyph {
                '.' | '#' => None,
                g => match glyphs.iter().position(|&known| known == g) {
                    Some(i) => Some(i as u8),
                    None => {
                        return Err(EnvError::MalformedMap(format!(
                            "unknown room glyph {g:?} at ({x}, {y})"
                        )))
                    }
                },
            });
        }
    }
    map.with_rooms(names, room_of)
}

fn grid_shape(rows: &[&str]) -> Result<(usize, usize), EnvError> {
    let Some(first) = rows.first() else {
        return Err(EnvError::MalformedMap("empty grid".into()));
    };
    let width = first.chars().count();
    if let Some((y, row)) = rows.iter().enumerate().find(|(_, r)| r.chars().count() != width) {
        return Err(EnvError::MalformedMap(format!(
            "row {y} has {} cells, expected {width}",
            row.chars().count()
        )));
    }
    Ok((width, rows.len()))
}

/// Serialize a map back into the document format.
pub fn render_map(map: &GridMap) -> String {
    let mut out = String::new();
    for row in map.to_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    if map.room_names().is_empty() {
        return out;
    }
    out.push_str("ROOMS:\n");
    for (i, name) in map.room_names().iter().enumerate() {
        out.push_str(&format!("{}={}\n", (b'a' + i as u8) as char, name));
    }
    for y in 0..map.height() {
        for x in 0..map.width() {
            let p = super::Point::new(x as i32, y as i32);
            let glyph = match map.room_at(p) {
                Some(name) => {
                    let i = map.room_names().iter().position(|n| n == name).unwrap_or(0);
                    (b'a' + i as u8) as char
                }
                None if map.is_walkable(p) => '.',
                None => '#',
            };
            out.push(glyph);
        }
        out.push('\n');
    }
    out
}
