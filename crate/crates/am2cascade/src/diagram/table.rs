//! Expected existence/stability pattern of every region `J0..J69`.

use crate::equilibria::Label;

use super::signature::Mark;

/// One row of the region table: a mark per label column plus a color name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionRow {
    pub j: u8,
    pub marks: [Mark; 15],
    pub color: &'static str,
}

impl RegionRow {
    pub fn mark(&self, label: Label) -> Mark {
        self.marks[label.column()]
    }

    /// Compact form: one of `S`, `U`, `.` per column.
    pub fn pattern(&self) -> String {
        self.marks.iter().map(|m| m.symbol()).collect()
    }
}

// Columns: E00^00 E00^01 E00^02 E00^10 E00^11 E00^12 E10^10 E10^11 E10^12
//          E01^01 E02^01 E01^11 E02^11 E11^11 E12^11
const RAW: [(&str, &str); 70] = [
    ("S..............", "cyan"),
    ("U..S...........", "grey"),
    ("UUUSSU.........", "pink"),
    ("SSU............", "plum"),
    ("US.............", "yellow"),
    ("UU.US..........", "blue"),
    ("UU.UU.US.......", "tan"),
    ("UU.UU.SSU......", "white"),
    ("UU.SSU.........", "pink"),
    ("UU.UUUSSU......", "white"),
    ("UU.UUUSSUUUUUSU", "magenta"),
    ("UU.UU.SSUUUUUSU", "magenta"),
    ("UU.UU.US.UUUUSU", "wheat"),
    ("UU.US....UUSU..", "gold"),
    ("US.......SU....", "turquoise"),
    ("UU.......S.....", "sienna"),
    ("UU.UU....U.S...", "green"),
    ("UU.UU.UU.U.U.S.", "red"),
    ("UU.UU.US.U.U.SU", "wheat"),
    ("UU.UU.SSUU.U.SU", "magenta"),
    ("UU.UUUSSUU.U.SU", "magenta"),
    ("UU.UU.UUUU.U.S.", "red"),
    ("UU.UUUUUUU.U.S.", "red"),
    ("UU.UUU...U.S...", "green"),
    ("UU.SSU...UUSU..", "brown"),
    ("U..US..........", "blue"),
    ("U..SSU.........", "pink"),
    ("UU.UUUSSU....SU", "magenta"),
    ("UU.UU.SSU.U.USU", "magenta"),
    ("UU.UU.US.....SU", "wheat"),
    ("UU.UU.UU.....S.", "red"),
    ("UU.UU.SS.......", "white"),
    ("U.....S........", "violet"),
    ("U.....S..UU..SU", "navy"),
    ("S........SU....", "khaki"),
    ("U........S.....", "sienna"),
    ("U.....U..U...S.", "red"),
    ("U..UUUU..U.U.S.", "red"),
    ("U.....S..U...SU", "navy"),
    ("U..UUUS..U.U.SU", "navy"),
    ("UUUUUUSSUU.U.SU", "magenta"),
    ("UUUUUUUUUU.U.S.", "red"),
    ("UUU...UUUU...S.", "red"),
    ("UUU......S.....", "sienna"),
    ("UU....UU.U...S.", "red"),
    ("UU....UUUU...S.", "red"),
    ("UU.UU.UU.U.U.S.", "red"),
    ("SSU......SU....", "black"),
    ("UUUUSU...UUSU..", "gold"),
    ("UUUUUUSSUUUUUSU", "magenta"),
    ("UU.UUUSSUUUUUSU", "magenta"),
    ("UU.UU.SSUUUUUSU", "magenta"),
    ("UU.UU.US.UUUUSU", "wheat"),
    ("UU.SSU...UUSU..", "coral"),
    ("UU.US....UUSU..", "gold"),
    ("US.......SU....", "turquoise"),
    ("UU.UU....U.S...", "green"),
    ("UU.UU.US.U.U.SU", "wheat"),
    ("UU.UU.SSUU.U.SU", "magenta"),
    ("UU.UUUSSUU.U.SU", "magenta"),
    ("UU.UU.SSU....SU", "magenta"),
    ("UU.UU.US.....SU", "wheat"),
    ("UU.UU.UU.....S.", "red"),
    ("UU.UU.US.......", "tan"),
    ("U..US..........", "blue"),
    ("U..UU.US.......", "tan"),
    ("U..UU.UU.....S.", "red"),
    ("U..UU.US.....SU", "wheat"),
    ("U..UU.SSU....SU", "magenta"),
    ("U..UUUSSU....SU", "magenta"),
];

fn parse(pattern: &str) -> [Mark; 15] {
    let mut out = [Mark::Absent; 15];
    for (slot, c) in out.iter_mut().zip(pattern.bytes()) {
        *slot = match c {
            b'S' => Mark::Stable,
            b'U' => Mark::Unstable,
            _ => Mark::Absent,
        };
    }
    out
}

/// All seventy rows, indexed by `j`.
pub fn region_table() -> Vec<RegionRow> {
    RAW.iter()
        .enumerate()
        .map(|(j, (p, c))| RegionRow {
            j: j as u8,
            marks: parse(p),
            color: c,
        })
        .collect()
}

pub fn region_row(j: u8) -> Option<RegionRow> {
    RAW.get(j as usize).map(|(p, c)| RegionRow {
        j,
        marks: parse(p),
        color: c,
    })
}

/// Hex value of a legend color name.
pub fn color_hex(name: &str) -> &'static str {
    match name {
        "cyan" => "#00ffff",
        "grey" => "#808080",
        "pink" => "#ffc0cb",
        "plum" => "#dda0dd",
        "yellow" => "#ffff00",
        "blue" => "#0000ff",
        "tan" => "#d2b48c",
        "white" => "#ffffff",
        "magenta" => "#ff00ff",
        "wheat" => "#f5deb3",
        "gold" => "#ffd700",
        "turquoise" => "#40e0d0",
        "sienna" => "#a0522d",
        "green" => "#008000",
        "red" => "#ff0000",
        "brown" => "#a52a2a",
        "violet" => "#ee82ee",
        "navy" => "#000080",
        "khaki" => "#f0e68c",
        "black" => "#000000",
        "coral" => "#ff7f50",
        _ => "#bebebe",
    }
}
