use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use crate::env::{Cell, NodeId, SimState};
use crate::error::{Error, Result};

/// Table key: where the UAV is perched plus the priority/served vector.
/// Node coordinates are constant for a scenario and are left out.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub uav_cell: Cell,
    pub priorities: Vec<u8>,
}

impl StateKey {
    pub fn of(state: &SimState) -> Self {
        Self {
            uav_cell: state.uav_cell,
            priorities: state.priorities.clone(),
        }
    }

    pub fn unserved(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.priorities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, _)| i)
    }

    pub fn is_terminal(&self) -> bool {
        self.priorities.iter().all(|&p| p == 0)
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{} ", self.uav_cell.gx, self.uav_cell.gy)?;
        for (i, p) in self.priorities.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Sparse action-value table. Unseen entries read as 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    values: HashMap<StateKey, BTreeMap<NodeId, f64>>,
}

impl QTable {
    pub fn get(&self, key: &StateKey, action: NodeId) -> f64 {
        self.values
            .get(key)
            .and_then(|row| row.get(&action))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn set(&mut self, key: &StateKey, action: NodeId, value: f64) {
        debug_assert!(value.is_finite());
        debug_assert!(key.priorities.get(action).is_some_and(|&p| p > 0));
        if let Some(row) = self.values.get_mut(key) {
            row.insert(action, value);
        } else {
            self.values
                .insert(key.clone(), BTreeMap::from([(action, value)]));
        }
    }

    /// Highest-valued unserved action at `key`; ties go to the lowest id.
    pub fn argmax(&self, key: &StateKey) -> Option<NodeId> {
        argmax_by(key, |a| self.get(key, a))
    }

    /// Number of stored (state, action) entries.
    pub fn len(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, NodeId, f64)> {
        self.values
            .iter()
            .flat_map(|(k, row)| row.iter().map(move |(&a, &v)| (k, a, v)))
    }
}

pub(crate) fn argmax_by(key: &StateKey, mut value: impl FnMut(NodeId) -> f64) -> Option<NodeId> {
    let mut best: Option<(NodeId, f64)> = None;
    for a in key.unserved() {
        let v = value(a);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((a, v)),
        }
    }
    best.map(|(a, _)| a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selector {
    #[default]
    A,
    B,
}

impl Selector {
    pub fn toggled(self) -> Self {
        match self {
            Selector::A => Selector::B,
            Selector::B => Selector::A,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Selector::A => "A",
            Selector::B => "B",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Selector::A),
            "B" => Some(Selector::B),
            _ => None,
        }
    }
}

/// The two double-Q tables plus which one acts and learns next.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTablePair {
    pub table_a: QTable,
    pub table_b: QTable,
    pub selector: Selector,
}

impl QTablePair {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_selector(selector: Selector) -> Self {
        Self {
            selector,
            ..Self::default()
        }
    }

    /// The table the current selector acts with.
    pub fn active(&self) -> &QTable {
        match self.selector {
            Selector::A => &self.table_a,
            Selector::B => &self.table_b,
        }
    }

    /// Double-Q update of the selected table, then toggles the selector.
    ///
    /// With A selected: `a* = argmax Q_A(s', .)` and
    /// `Q_A(s,a) <- (1-α) Q_A(s,a) + α (r + γ Q_B(s', a*))`; B is symmetric.
    /// A terminal successor bootstraps with 0.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        state: &StateKey,
        action: NodeId,
        reward: f64,
        next: &StateKey,
        terminal: bool,
        alpha: f64,
        gamma: f64,
    ) {
        let (own, other) = match self.selector {
            Selector::A => (&mut self.table_a, &self.table_b),
            Selector::B => (&mut self.table_b, &self.table_a),
        };
        let bootstrap = if terminal {
            0.0
        } else {
            own.argmax(next).map_or(0.0, |best| other.get(next, best))
        };
        let old = own.get(state, action);
        let new = (1.0 - alpha) * old + alpha * (reward + gamma * bootstrap);
        own.set(state, action, new);
        self.selector = self.selector.toggled();
    }

    /// Argmax of the elementwise mean of both tables; ties go to the lowest id.
    pub fn mean_argmax(&self, key: &StateKey) -> Option<NodeId> {
        argmax_by(key, |a| {
            0.5 * (self.table_a.get(key, a) + self.table_b.get(key, a))
        })
    }

    /// A and B exchanged, selector flipped.
    pub fn swapped(&self) -> Self {
        Self {
            table_a: self.table_b.clone(),
            table_b: self.table_a.clone(),
            selector: self.selector.toggled(),
        }
    }

    /// Text dump: a `# selector X` header, then one
    /// `A|B <gx,gy> <p0,p1,..> <action> <value>` row per entry, rows sorted
    /// lexicographically.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<String> = [(Selector::A, &self.table_a), (Selector::B, &self.table_b)]
            .into_iter()
            .flat_map(|(sel, table)| {
                table
                    .iter()
                    .map(move |(key, a, v)| format!("{} {key} {a} {v}", sel.tag()))
            })
            .collect();
        rows.sort_unstable();
        let mut out = format!("# selector {}\n", self.selector.tag());
        for row in rows {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            msg,
        };
        let mut pair = QTablePair::new();
        let mut width: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let words: Vec<&str> = comment.split_whitespace().collect();
                if let ["selector", tag] = words.as_slice() {
                    pair.selector = Selector::from_tag(tag)
                        .ok_or_else(|| err(lineno, format!("bad selector `{tag}`")))?;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [tag, loc, prio, action, value] = fields.as_slice() else {
                return Err(err(
                    lineno,
                    "expected `A|B GX,GY P0,P1,.. ACTION VALUE`".into(),
                ));
            };
            let sel = Selector::from_tag(tag)
                .ok_or_else(|| err(lineno, format!("bad table tag `{tag}`")))?;
            let (gx, gy) = loc
                .split_once(',')
                .and_then(|(x, y)| Some((x.parse().ok()?, y.parse().ok()?)))
                .ok_or_else(|| err(lineno, format!("bad location `{loc}`")))?;
            let priorities: Vec<u8> = prio
                .split(',')
                .map(|p| p.parse().ok().filter(|&p: &u8| p <= 4))
                .collect::<Option<_>>()
                .ok_or_else(|| err(lineno, format!("bad priority vector `{prio}`")))?;
            if *width.get_or_insert(priorities.len()) != priorities.len() {
                return Err(err(lineno, "priority vector length changes".into()));
            }
            let action: NodeId = action
                .parse()
                .map_err(|_| err(lineno, format!("bad action `{action}`")))?;
            if priorities.get(action).is_none_or(|&p| p == 0) {
                return Err(err(
                    lineno,
                    format!("action {action} is not unserved in this key"),
                ));
            }
            let value: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(lineno, format!("bad value `{value}`")))?;
            let key = StateKey {
                uav_cell: Cell::new(gx, gy),
                priorities,
            };
            match sel {
                Selector::A => pair.table_a.set(&key, action, value),
                Selector::B => pair.table_b.set(&key, action, value),
            }
        }
        Ok(pair)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}
