use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

/// Integer grid coordinate; `(0, 0)` is the bottom-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub gx: u32,
    pub gy: u32,
}

impl Cell {
    pub const fn new(gx: u32, gy: u32) -> Self {
        Self { gx, gy }
    }
}

/// Position on the ground plane in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePoint {
    pub id: usize,
    pub cell: Cell,
    /// Initial service priority, 1 (low) to 4 (very high).
    pub priority: u8,
}

/// An immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    grid_width: u32,
    grid_height: u32,
    cell_side: f64,
    uav_start: Cell,
    nodes: Vec<NodePoint>,
    seed: Option<u64>,
}

pub const MAX_PRIORITY: u8 = 4;

impl Scenario {
    /// Builds a scenario from `(cell, priority)` pairs; node ids follow the
    /// order of `nodes`.
    pub fn new(
        grid_width: u32,
        grid_height: u32,
        cell_side: f64,
        uav_start: Cell,
        nodes: impl IntoIterator<Item = (Cell, u8)>,
    ) -> Result<Self> {
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(id, (cell, priority))| NodePoint { id, cell, priority })
            .collect();
        let s = Self {
            grid_width,
            grid_height,
            cell_side,
            uav_start,
            nodes,
            seed: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(Error::InvalidScenario(format!(
                "grid must be at least 1x1, got {}x{}",
                self.grid_width, self.grid_height
            )));
        }
        if !(self.cell_side.is_finite() && self.cell_side > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "cell side must be positive, got {}",
                self.cell_side
            )));
        }
        if !self.in_bounds(self.uav_start) {
            return Err(Error::InvalidScenario(format!(
                "start {:?} is outside the grid",
                self.uav_start
            )));
        }
        for node in &self.nodes {
            if !self.in_bounds(node.cell) {
                return Err(Error::InvalidScenario(format!(
                    "node {} at {:?} is outside the grid",
                    node.id, node.cell
                )));
            }
            if node.cell == self.uav_start {
                return Err(Error::InvalidScenario(format!(
                    "node {} occupies the start cell",
                    node.id
                )));
            }
            if !(1..=MAX_PRIORITY).contains(&node.priority) {
                return Err(Error::InvalidScenario(format!(
                    "node {} has priority {}, expected 1..=4",
                    node.id, node.priority
                )));
            }
        }
        Ok(())
    }

    pub fn grid_width(&self) -> u32 {
        self.grid_width
    }

    pub fn grid_height(&self) -> u32 {
        self.grid_height
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn uav_start(&self) -> Cell {
        self.uav_start
    }

    pub fn nodes(&self) -> &[NodePoint] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn priorities(&self) -> Vec<u8> {
        self.nodes.iter().map(|n| n.priority).collect()
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.gx < self.grid_width && cell.gy < self.grid_height
    }

    /// Ground position of a grid coordinate: `(gx, gy) * cell_side`.
    pub fn position_of(&self, cell: Cell) -> Result<Point> {
        if !self.in_bounds(cell) {
            return Err(Error::Domain(format!(
                "cell ({}, {}) outside {}x{} grid",
                cell.gx, cell.gy, self.grid_width, self.grid_height
            )));
        }
        Ok(Point::new(
            f64::from(cell.gx) * self.cell_side,
            f64::from(cell.gy) * self.cell_side,
        ))
    }

    pub fn node_position(&self, id: usize) -> Point {
        let c = self.nodes[id].cell;
        Point::new(
            f64::from(c.gx) * self.cell_side,
            f64::from(c.gy) * self.cell_side,
        )
    }

    pub fn start_position(&self) -> Point {
        let c = self.uav_start;
        Point::new(
            f64::from(c.gx) * self.cell_side,
            f64::from(c.gy) * self.cell_side,
        )
    }

    /// Same layout with node priorities replaced.
    pub fn with_priorities(&self, priorities: &[u8]) -> Result<Self> {
        if priorities.len() != self.nodes.len() {
            return Err(Error::InvalidScenario(format!(
                "expected {} priorities, got {}",
                self.nodes.len(),
                priorities.len()
            )));
        }
        let mut s = self.clone();
        for (node, &p) in s.nodes.iter_mut().zip(priorities) {
            node.priority = p;
        }
        s.validate()?;
        Ok(s)
    }

    /// Serializes to the line-oriented scenario format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed {seed}");
        }
        let _ = writeln!(
            out,
            "grid {} {} {}",
            self.grid_width, self.grid_height, self.cell_side
        );
        let _ = writeln!(out, "start {} {}", self.uav_start.gx, self.uav_start.gy);
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "node {} {} {} {}",
                n.id, n.cell.gx, n.cell.gy, n.priority
            );
        }
        out
    }

    /// Parses the scenario format. `source_name` labels parse errors.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            msg,
        };
        let mut grid: Option<(u32, u32, f64, usize)> = None;
        let mut start: Option<(Cell, usize)> = None;
        let mut nodes: Vec<(Cell, u8)> = Vec::new();
        let mut seed = None;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let (content, comment) = match raw.split_once('#') {
                Some((c, rest)) => (c, Some(rest)),
                None => (raw, None),
            };
            if let Some(comment) = comment {
                let words: Vec<&str> = comment.split_whitespace().collect();
                if let ["seed", v] = words.as_slice() {
                    seed = v.parse().ok();
                }
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let Some((&keyword, args)) = fields.split_first() else {
                continue;
            };
            match keyword {
                "grid" => {
                    if grid.is_some() {
                        return Err(err(lineno, "duplicate `grid` line".into()));
                    }
                    let [w, h, side] = args else {
                        return Err(err(lineno, "expected `grid W H CELL_SIDE_M`".into()));
                    };
                    let w = parse_num(w, "grid width").map_err(|m| err(lineno, m))?;
                    let h = parse_num(h, "grid height").map_err(|m| err(lineno, m))?;
                    let side = parse_num(side, "cell side").map_err(|m| err(lineno, m))?;
                    grid = Some((w, h, side, lineno));
                }
                "start" => {
                    if start.is_some() {
                        return Err(err(lineno, "duplicate `start` line".into()));
                    }
                    let [gx, gy] = args else {
                        return Err(err(lineno, "expected `start GX GY`".into()));
                    };
                    let gx = parse_num(gx, "start x").map_err(|m| err(lineno, m))?;
                    let gy = parse_num(gy, "start y").map_err(|m| err(lineno, m))?;
                    start = Some((Cell::new(gx, gy), lineno));
                }
                "node" => {
                    let [id, gx, gy, p] = args else {
                        return Err(err(lineno, "expected `node ID GX GY PRIORITY`".into()));
                    };
                    let id: usize = parse_num(id, "node id").map_err(|m| err(lineno, m))?;
                    if id != nodes.len() {
                        return Err(err(
                            lineno,
                            format!("node id {id} out of order, expected {}", nodes.len()),
                        ));
                    }
                    let gx = parse_num(gx, "node x").map_err(|m| err(lineno, m))?;
                    let gy = parse_num(gy, "node y").map_err(|m| err(lineno, m))?;
                    let p = parse_num(p, "priority").map_err(|m| err(lineno, m))?;
                    let cell = Cell::new(gx, gy);
                    if let Some((w, h, _, _)) = grid {
                        if gx >= w || gy >= h {
                            return Err(err(lineno, format!("node {id} outside {w}x{h} grid")));
                        }
                    }
                    if !(1..=MAX_PRIORITY).contains(&p) {
                        return Err(err(lineno, format!("priority {p} not in 1..=4")));
                    }
                    nodes.push((cell, p));
                }
                other => return Err(err(lineno, format!("unknown keyword `{other}`"))),
            }
        }

        let (w, h, side, grid_line) = grid.ok_or_else(|| err(0, "missing `grid` line".into()))?;
        let (start, start_line) = start.ok_or_else(|| err(0, "missing `start` line".into()))?;
        let scenario = Scenario::new(w, h, side, start, nodes).map_err(|e| match e {
            Error::InvalidScenario(msg) => err(grid_line.max(start_line), msg),
            other => other,
        })?;
        Ok(match seed {
            Some(s) => scenario.with_seed(s),
            None => scenario,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("invalid {what} `{s}`"))
}

/// Random scenario: the UAV starts at the bottom-left corner, nodes occupy
/// distinct cells drawn uniformly from the rest of the grid, priorities are
/// uniform over 1..=4.
pub fn generate_scenario(
    seed: u64,
    grid_width: u32,
    grid_height: u32,
    cell_side: f64,
    node_count: usize,
) -> Result<Scenario> {
    if grid_width == 0 || grid_height == 0 {
        return Err(Error::InvalidScenario(format!(
            "grid must be at least 1x1, got {grid_width}x{grid_height}"
        )));
    }
    let cells = grid_width as usize * grid_height as usize;
    let free = cells - 1;
    if node_count > free {
        return Err(Error::InvalidScenario(format!(
            "{node_count} nodes do not fit on a {grid_width}x{grid_height} grid \
             with the start cell reserved ({free} free cells)"
        )));
    }
    let start = Cell::new(0, 0);
    let mut rng = seeding::stream(seed, Stream::Scenario);
    // free cells are numbered row-major, skipping index 0 (the start)
    let picks = index::sample(&mut rng, free, node_count);
    let nodes: Vec<(Cell, u8)> = picks
        .into_iter()
        .map(|i| {
            let flat = i + 1;
            let cell = Cell::new(
                (flat % grid_width as usize) as u32,
                (flat / grid_width as usize) as u32,
            );
            (cell, rng.gen_range(1..=MAX_PRIORITY))
        })
        .collect();
    Ok(Scenario::new(grid_width, grid_height, cell_side, start, nodes)?.with_seed(seed))
}
