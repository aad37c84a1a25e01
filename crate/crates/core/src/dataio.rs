//! FPD dataset files and SVG problem renderings.
//!
//! FPD layout, little-endian:
//!
//! ```text
//! "FPD1" u32 n u32 sample_count
//! per sample: u8 flags            bit0 truth map, bit1 prediction map, bit2 unsolvable
//!             n² u8 environment   0 free, 1 obstacle, row-major
//!             u16 k, k × (u16 row, u16 col)   starts, 1-based
//!             u16 row, u16 col                goal, 1-based
//!             [n² u8 truth map]               if bit0
//!             [n² f32 prediction]             if bit1
//! u32 crc32 of every preceding byte
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

use crate::astar::Path;
use crate::gridworld::{Cell, GridMap, PlanProblem};
use crate::netinfer::ValueMap;

pub const FPD_MAGIC: &[u8; 4] = b"FPD1";

const FLAG_TRUTH: u8 = 1;
const FLAG_PRED: u8 = 1 << 1;
const FLAG_UNSOLVABLE: u8 = 1 << 2;
const KNOWN_FLAGS: u8 = FLAG_TRUTH | FLAG_PRED | FLAG_UNSOLVABLE;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("format error: {0}")]
    Format(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub problem: PlanProblem,
    /// Ground-truth path mask (union over starts).
    pub truth: Option<Vec<u8>>,
    pub prediction: Option<ValueMap>,
    /// Set when the oracle found no path for some start.
    pub unsolvable: bool,
}

impl Sample {
    pub fn new(problem: PlanProblem) -> Self {
        Sample { problem, truth: None, prediction: None, unsolvable: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(n: usize) -> Self {
        Dataset { n, samples: Vec::new() }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, DataError> {
        let n = self.n;
        if n > u16::MAX as usize {
            return Err(DataError::Format(format!("grid size {n} does not fit 1-based u16 coordinates")));
        }
        let mut buf = Vec::new();
        buf.extend_from_slice(FPD_MAGIC);
        buf.extend_from_slice(&(n as u32).to_le_bytes());
        buf.extend_from_slice(&u32::try_from(self.samples.len()).map_err(|_| DataError::Format("too many samples".into()))?.to_le_bytes());
        for (i, s) in self.samples.iter().enumerate() {
            let p = &s.problem;
            if p.grid.size() != n {
                return Err(DataError::Format(format!("sample {i} has size {}, dataset {n}", p.grid.size())));
            }
            let mut flags = 0;
            if s.truth.is_some() {
                flags |= FLAG_TRUTH;
            }
            if s.prediction.is_some() {
                flags |= FLAG_PRED;
            }
            if s.unsolvable {
                flags |= FLAG_UNSOLVABLE;
            }
            buf.push(flags);
            buf.extend(p.grid.cells().iter().map(|&o| o as u8));
            let k = u16::try_from(p.starts.len()).map_err(|_| DataError::Format(format!("sample {i}: too many starts")))?;
            buf.extend_from_slice(&k.to_le_bytes());
            for &c in p.starts.iter().chain(std::iter::once(&p.goal)) {
                if !p.grid.in_bounds(c) {
                    return Err(DataError::Format(format!("sample {i}: cell {c} out of bounds")));
                }
                buf.extend_from_slice(&((c.row + 1) as u16).to_le_bytes());
                buf.extend_from_slice(&((c.col + 1) as u16).to_le_bytes());
            }
            if let Some(t) = &s.truth {
                if t.len() != n * n {
                    return Err(DataError::Format(format!("sample {i}: truth map has {} cells", t.len())));
                }
                buf.extend(t.iter().map(|&v| (v != 0) as u8));
            }
            if let Some(pred) = &s.prediction {
                if pred.size() != n {
                    return Err(DataError::Format(format!("sample {i}: prediction has size {}", pred.size())));
                }
                for v in pred.values() {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DataError> {
        if bytes.len() < 16 {
            return Err(DataError::Format(format!("file too short ({} bytes)", bytes.len())));
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(DataError::Checksum { stored, computed });
        }
        let mut r = Reader { buf: payload, pos: 0 };
        if r.take(4)? != FPD_MAGIC {
            return Err(DataError::Format("bad magic".into()));
        }
        let n = r.u32()? as usize;
        if n < 2 || n > u16::MAX as usize {
            return Err(DataError::Format(format!("invalid grid size {n}")));
        }
        let count = r.u32()? as usize;
        let nn = n * n;
        let mut samples = Vec::with_capacity(count.min(payload.len() / (nn + 9)));
        for i in 0..count {
            let flags = r.u8()?;
            if flags & !KNOWN_FLAGS != 0 {
                return Err(DataError::Format(format!("sample {i}: unknown flags {flags:#04x}")));
            }
            let env = r.take(nn)?;
            if let Some(bad) = env.iter().find(|&&b| b > 1) {
                return Err(DataError::Format(format!("sample {i}: environment byte {bad}")));
            }
            let grid = GridMap::from_cells(n, env.iter().map(|&b| b == 1).collect());
            let k = r.u16()? as usize;
            let mut cells = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                let (row, col) = (r.u16()? as usize, r.u16()? as usize);
                if row == 0 || col == 0 || row > n || col > n {
                    return Err(DataError::Format(format!("sample {i}: coordinate {{{row},{col}}} outside 1..={n}")));
                }
                cells.push(Cell::new(row - 1, col - 1));
            }
            let goal = cells.pop().unwrap();
            let truth = if flags & FLAG_TRUTH != 0 {
                let t = r.take(nn)?;
                if let Some(bad) = t.iter().find(|&&b| b > 1) {
                    return Err(DataError::Format(format!("sample {i}: truth byte {bad}")));
                }
                Some(t.to_vec())
            } else {
                None
            };
            let prediction = if flags & FLAG_PRED != 0 {
                let raw = r.take(nn * 4)?;
                Some(ValueMap::new(n, raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()))
            } else {
                None
            };
            samples.push(Sample {
                problem: PlanProblem { grid, starts: cells, goal },
                truth,
                prediction,
                unsolvable: flags & FLAG_UNSOLVABLE != 0,
            });
        }
        if r.pos != payload.len() {
            return Err(DataError::Format(format!("{} trailing bytes", payload.len() - r.pos)));
        }
        Ok(Dataset { n, samples })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], DataError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DataError::Format("unexpected end of file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, DataError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DataError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, DataError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> Result<(), DataError> {
    out.write_all(&dataset.to_bytes()?)?;
    Ok(())
}

pub fn read_dataset<R: Read>(mut input: R) -> Result<Dataset, DataError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    Dataset::from_bytes(&bytes)
}

/// Pixel size of one grid cell in rendered SVGs.
pub const CELL_PX: f64 = 20.0;
/// Dot radius for a value of 1.
pub const MAX_DOT_RADIUS: f64 = CELL_PX * 0.4;

/// Optional overlays for [`render_problem`].
#[derive(Default)]
pub struct Overlays<'a> {
    /// Drawn as crosses.
    pub oracle: &'a [Path],
    /// Drawn as blue dots with radius proportional to the value.
    pub value_map: Option<&'a ValueMap>,
    /// Each drawn as a polyline through cell centres.
    pub reconstructed: &'a [Path],
}

/// SVG picture of a problem: obstacles black, free cells white, starts green,
/// goal red.
pub fn render_problem(problem: &PlanProblem, overlays: &Overlays<'_>) -> String {
    let n = problem.grid.size();
    let side = n as f64 * CELL_PX;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    );
    svg.push_str("<g id=\"cells\" stroke=\"#cccccc\" stroke-width=\"0.5\">\n");
    for r in 0..n {
        for c in 0..n {
            let cell = Cell::new(r, c);
            let fill = if problem.grid.is_obstacle(cell) {
                "black"
            } else if cell == problem.goal {
                "red"
            } else if problem.starts.contains(&cell) {
                "green"
            } else {
                "white"
            };
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{CELL_PX}" height="{CELL_PX}" fill="{fill}"/>"#,
                c as f64 * CELL_PX,
                r as f64 * CELL_PX
            );
        }
    }
    svg.push_str("</g>\n");

    if let Some(vm) = overlays.value_map {
        svg.push_str("<g id=\"values\" fill=\"blue\">\n");
        for r in 0..n.min(vm.size()) {
            for c in 0..n.min(vm.size()) {
                let radius = vm.get(r, c).clamp(0.0, 1.0) as f64 * MAX_DOT_RADIUS;
                if radius <= 0.0 {
                    continue;
                }
                let (cx, cy) = centre(Cell::new(r, c));
                let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="{radius:.3}"/>"#);
            }
        }
        svg.push_str("</g>\n");
    }

    if !overlays.oracle.is_empty() {
        svg.push_str("<g id=\"oracle\" stroke=\"black\" stroke-width=\"1.5\">\n");
        let d = CELL_PX * 0.3;
        for &cell in overlays.oracle.iter().flat_map(|p| p.cells()) {
            let (cx, cy) = centre(cell);
            let _ = writeln!(
                svg,
                r#"<path class="cross" d="M{} {} L{} {} M{} {} L{} {}"/>"#,
                cx - d,
                cy - d,
                cx + d,
                cy + d,
                cx - d,
                cy + d,
                cx + d,
                cy - d
            );
        }
        svg.push_str("</g>\n");
    }

    for path in overlays.reconstructed {
        let points: Vec<String> = path
            .cells()
            .iter()
            .map(|&c| {
                let (x, y) = centre(c);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="reconstructed" fill="none" stroke="orange" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn centre(cell: Cell) -> (f64, f64) {
    ((cell.col as f64 + 0.5) * CELL_PX, (cell.row as f64 + 0.5) * CELL_PX)
}
