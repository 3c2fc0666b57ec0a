use super::MazeError;

/// Time-invariant 2-D projection of the no-fly zones.
///
/// Text form is one row per line, `.` for free and `#` for blocked, with the
/// first line being `y = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticMap {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
}

impl StaticMap {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            blocked: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn is_blocked(&self, x: u32, y: u32) -> bool {
        self.blocked[y as usize * self.width as usize + x as usize]
    }

    pub fn set_blocked(&mut self, x: u32, y: u32, blocked: bool) {
        let idx = y as usize * self.width as usize + x as usize;
        self.blocked[idx] = blocked;
    }

    /// Blocks the half-open rectangle `[x, x + w) x [y, y + h)`, clipped to the map.
    pub fn block_rect(&mut self, x: u32, y: u32, w: u32, h: u32) {
        let x1 = x.saturating_add(w).min(self.width);
        let y1 = y.saturating_add(h).min(self.height);
        for yy in y.min(self.height)..y1 {
            for xx in x.min(self.width)..x1 {
                self.set_blocked(xx, yy, true);
            }
        }
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn parse(text: &str) -> Result<Self, MazeError> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(MazeError::StaticMap("map has no rows".into()));
        }
        let width = rows[0].chars().count();
        let mut blocked = Vec::with_capacity(width * rows.len());
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(MazeError::StaticMap(format!(
                    "line {}: expected {width} cells, found {}",
                    y + 1,
                    row.chars().count()
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '.' => blocked.push(false),
                    '#' => blocked.push(true),
                    other => {
                        return Err(MazeError::StaticMap(format!(
                            "line {}, column {}: unexpected character {other:?}",
                            y + 1,
                            x + 1
                        )))
                    }
                }
            }
        }
        Ok(Self {
            width: width as u32,
            height: rows.len() as u32,
            blocked,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width as usize + 1) * self.height as usize);
        for row in self.blocked.chunks(self.width as usize) {
            out.extend(row.iter().map(|&b| if b { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "..#\n#..\n";
        let map = StaticMap::parse(text).unwrap();
        assert_eq!((map.width(), map.height()), (3, 2));
        assert!(map.is_blocked(2, 0));
        assert!(map.is_blocked(0, 1));
        assert!(!map.is_blocked(1, 1));
        assert_eq!(map.to_text(), text);
    }

    #[test]
    fn ragged_rows_and_bad_chars_are_rejected() {
        assert!(StaticMap::parse("...\n..\n").is_err());
        assert!(StaticMap::parse(".x.\n").is_err());
        assert!(StaticMap::parse("\n").is_err());
    }

    #[test]
    fn rect_is_clipped() {
        let mut map = StaticMap::empty(4, 4);
        map.block_rect(2, 3, 5, 5);
        assert_eq!(map.blocked_count(), 2);
        assert_eq!(map.to_text(), "....\n....\n....\n..##\n");
    }
}
