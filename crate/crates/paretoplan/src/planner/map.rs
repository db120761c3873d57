//! Environment maps: named locations on a plane, directed arcs with
//! 8-way compass headings, charging stations, and a mutable blocked set.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::PlanError;

/// Seconds per 45-degree rotation step.
pub const ROTATION_STEP_SECS: f64 = 2.6180;

/// Eight compass directions, clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    North,
    NorthEast,
    East,
    SouthEast,
    South,
    SouthWest,
    West,
    NorthWest,
}

pub const HEADINGS: [Heading; 8] = [
    Heading::North,
    Heading::NorthEast,
    Heading::East,
    Heading::SouthEast,
    Heading::South,
    Heading::SouthWest,
    Heading::West,
    Heading::NorthWest,
];

impl Heading {
    pub fn index(self) -> u8 {
        HEADINGS.iter().position(|&h| h == self).unwrap() as u8
    }

    pub fn from_index(i: u8) -> Self {
        HEADINGS[i as usize % 8]
    }

    /// Quantizes a displacement to the nearest of the eight directions
    /// (x east, y north).
    pub fn from_vector(dx: f64, dy: f64) -> Self {
        // angle counter-clockwise from east; sector 0 = E, 1 = NE, ...
        let angle = dy.atan2(dx);
        let sector = ((angle / std::f64::consts::FRAC_PI_4).round() as i64).rem_euclid(8);
        match sector {
            0 => Heading::East,
            1 => Heading::NorthEast,
            2 => Heading::North,
            3 => Heading::NorthWest,
            4 => Heading::West,
            5 => Heading::SouthWest,
            6 => Heading::South,
            _ => Heading::SouthEast,
        }
    }

    /// Minimal number of 45-degree steps to face `to`.
    pub fn steps_to(self, to: Heading) -> u8 {
        let diff = (self.index() as i16 - to.index() as i16).unsigned_abs() as u8 % 8;
        diff.min(8 - diff)
    }
}

/// Time to rotate between two headings: 2.6180 s per 45-degree step,
/// at most 10.4720 s for a half turn.
pub fn rotation_time(from: Heading, to: Heading) -> f64 {
    ROTATION_STEP_SECS * f64::from(from.steps_to(to))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub name: String,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub charger: bool,
}

/// A directed arc between two locations.
#[derive(Debug, Clone, PartialEq)]
pub struct MapArc {
    pub from: usize,
    pub to: usize,
    pub distance_m: f64,
    pub heading: Heading,
}

/// The navigation graph. Arcs are directed and stored sorted by
/// (from, to); map files list undirected corridors that are materialized
/// in both directions with headings derived from coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    locations: Vec<Location>,
    arcs: Vec<MapArc>,
    blocked: BTreeSet<(usize, usize)>,
}

/// On-disk map format: undirected corridors with explicit distances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub locations: Vec<Location>,
    pub arcs: Vec<MapFileArc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFileArc {
    pub from: String,
    pub to: String,
    pub distance_m: f64,
}

impl EnvironmentMap {
    /// Builds a map from named locations and undirected corridors,
    /// materializing directed arcs both ways.
    pub fn new(
        locations: Vec<Location>,
        corridors: &[(String, String, f64)],
    ) -> Result<Self, PlanError> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, loc) in locations.iter().enumerate() {
            if index.insert(loc.name.as_str(), i).is_some() {
                return Err(PlanError::InvalidMap(format!("duplicate location {:?}", loc.name)));
            }
        }
        let mut arcs = Vec::with_capacity(corridors.len() * 2);
        for (from, to, distance) in corridors {
            let &f = index
                .get(from.as_str())
                .ok_or_else(|| PlanError::InvalidMap(format!("unknown location {from:?}")))?;
            let &t = index
                .get(to.as_str())
                .ok_or_else(|| PlanError::InvalidMap(format!("unknown location {to:?}")))?;
            if f == t {
                return Err(PlanError::InvalidMap(format!("self arc at {from:?}")));
            }
            if *distance <= 0.0 || !distance.is_finite() {
                return Err(PlanError::InvalidMap(format!(
                    "arc {from:?}->{to:?} must have positive distance, got {distance}"
                )));
            }
            let (dx, dy) = (locations[t].x - locations[f].x, locations[t].y - locations[f].y);
            arcs.push(MapArc { from: f, to: t, distance_m: *distance, heading: Heading::from_vector(dx, dy) });
            arcs.push(MapArc { from: t, to: f, distance_m: *distance, heading: Heading::from_vector(-dx, -dy) });
        }
        arcs.sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)));
        arcs.dedup_by(|a, b| (a.from, a.to) == (b.from, b.to));
        Ok(Self { locations, arcs, blocked: BTreeSet::new() })
    }

    pub fn from_map_file(file: &MapFile) -> Result<Self, PlanError> {
        let corridors: Vec<(String, String, f64)> = file
            .arcs
            .iter()
            .map(|a| (a.from.clone(), a.to.clone(), a.distance_m))
            .collect();
        Self::new(file.locations.clone(), &corridors)
    }

    pub fn to_map_file(&self) -> MapFile {
        let arcs = self
            .arcs
            .iter()
            .filter(|a| a.from < a.to)
            .map(|a| MapFileArc {
                from: self.locations[a.from].name.clone(),
                to: self.locations[a.to].name.clone(),
                distance_m: a.distance_m,
            })
            .collect();
        MapFile { locations: self.locations.clone(), arcs }
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn arcs(&self) -> &[MapArc] {
        &self.arcs
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn location_name(&self, index: usize) -> &str {
        &self.locations[index].name
    }

    pub fn is_charger(&self, index: usize) -> bool {
        self.locations[index].charger
    }

    pub fn charger_indices(&self) -> Vec<usize> {
        (0..self.locations.len()).filter(|&i| self.is_charger(i)).collect()
    }

    pub fn arcs_from(&self, from: usize) -> impl Iterator<Item = &MapArc> {
        self.arcs.iter().filter(move |a| a.from == from)
    }

    pub fn arc_between(&self, from: usize, to: usize) -> Option<&MapArc> {
        self.arcs.iter().find(|a| a.from == from && a.to == to)
    }

    /// Blocks both directions of the corridor. Idempotent.
    pub fn block_arc(&mut self, a: usize, b: usize) {
        self.blocked.insert((a, b));
        self.blocked.insert((b, a));
    }

    pub fn unblock_all(&mut self) {
        self.blocked.clear();
    }

    pub fn is_blocked(&self, from: usize, to: usize) -> bool {
        self.blocked.contains(&(from, to))
    }

    pub fn blocked_arcs(&self) -> &BTreeSet<(usize, usize)> {
        &self.blocked
    }

    pub fn set_blocked(&mut self, blocked: BTreeSet<(usize, usize)>) {
        self.blocked = blocked;
    }

    /// Shortest path by hop count over unblocked arcs (breadth-first,
    /// deterministic by arc order). Returns the location sequence
    /// including both endpoints.
    pub fn shortest_hop_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        self.shortest_hop_path_filtered(from, to, true)
    }

    /// Like [`Self::shortest_hop_path`] but optionally ignoring the
    /// blocked set (a planner that does not know about obstacles).
    pub fn shortest_hop_path_filtered(
        &self,
        from: usize,
        to: usize,
        respect_blocked: bool,
    ) -> Option<Vec<usize>> {
        if from == to {
            return Some(vec![from]);
        }
        let mut parent: Vec<Option<usize>> = vec![None; self.locations.len()];
        let mut queue = std::collections::VecDeque::new();
        parent[from] = Some(from);
        queue.push_back(from);
        while let Some(cur) = queue.pop_front() {
            for arc in self.arcs_from(cur) {
                if respect_blocked && self.is_blocked(arc.from, arc.to) {
                    continue;
                }
                if parent[arc.to].is_none() {
                    parent[arc.to] = Some(cur);
                    if arc.to == to {
                        let mut path = vec![to];
                        let mut node = to;
                        while node != from {
                            node = parent[node].unwrap();
                            path.push(node);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(arc.to);
                }
            }
        }
        None
    }
}

/// The bundled five-location demo map: two routes between the mission
/// endpoints and a charging spur.
///
/// ```text
///   l4 --- l1
///           |
///          l2 --- l3
///            \     |
///             \-- l5
/// ```
pub fn demo_map() -> EnvironmentMap {
    let loc = |name: &str, x: f64, y: f64, charger: bool| Location {
        name: name.to_string(),
        x,
        y,
        charger,
    };
    let corridors = [
        ("l1", "l2", 5.0),
        ("l1", "l4", 3.0),
        ("l2", "l3", 3.0),
        ("l2", "l5", 18f64.sqrt()),
        ("l3", "l5", 3.0),
    ];
    EnvironmentMap::new(
        vec![
            loc("l1", 0.0, 5.0, false),
            loc("l2", 0.0, 0.0, false),
            loc("l3", 3.0, 0.0, false),
            loc("l4", -3.0, 5.0, true),
            loc("l5", 3.0, -3.0, false),
        ],
        &corridors
            .iter()
            .map(|(a, b, d)| (a.to_string(), b.to_string(), *d))
            .collect::<Vec<_>>(),
    )
    .expect("demo map is well-formed")
}

/// A rectangular grid map with 5 m horizontal and 3 m vertical corridors,
/// locations named l1..l{cols*rows} row-major, and chargers in the
/// north-west and south-east corners.
pub fn demo_grid(cols: usize, rows: usize) -> EnvironmentMap {
    assert!(cols >= 2 && rows >= 2);
    let n = cols * rows;
    let mut locations = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            locations.push(Location {
                name: format!("l{}", k + 1),
                x: c as f64 * 5.0,
                // row 0 at the top (north)
                y: (rows - 1 - r) as f64 * 3.0,
                charger: k == 0 || k == n - 1,
            });
        }
    }
    let mut corridors = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                corridors.push((format!("l{}", k + 1), format!("l{}", k + 2), 5.0));
            }
            if r + 1 < rows {
                corridors.push((format!("l{}", k + 1), format!("l{}", k + cols + 1), 3.0));
            }
        }
    }
    EnvironmentMap::new(locations, &corridors).expect("grid map is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_table_matches_45_degree_steps() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(rotation_time(Heading::North, Heading::South), 10.4720));
        assert_eq!(rotation_time(Heading::South, Heading::South), 0.0);
        assert_eq!(rotation_time(Heading::SouthEast, Heading::South), 2.6180);
        assert!(close(rotation_time(Heading::NorthEast, Heading::South), 7.8540));
        assert!(close(rotation_time(Heading::East, Heading::South), 5.2360));
        assert!(close(rotation_time(Heading::West, Heading::South), 5.2360));
        // symmetric and bounded
        for a in HEADINGS {
            for b in HEADINGS {
                assert_eq!(rotation_time(a, b), rotation_time(b, a));
                assert!(rotation_time(a, b) <= 10.4721);
            }
        }
    }

    #[test]
    fn heading_quantization_covers_eight_ways() {
        assert_eq!(Heading::from_vector(0.0, 1.0), Heading::North);
        assert_eq!(Heading::from_vector(0.0, -5.0), Heading::South);
        assert_eq!(Heading::from_vector(3.0, 0.0), Heading::East);
        assert_eq!(Heading::from_vector(-3.0, 0.0), Heading::West);
        assert_eq!(Heading::from_vector(1.0, 1.0), Heading::NorthEast);
        assert_eq!(Heading::from_vector(3.0, -3.0), Heading::SouthEast);
        assert_eq!(Heading::from_vector(-1.0, -1.0), Heading::SouthWest);
        assert_eq!(Heading::from_vector(-1.0, 0.9), Heading::NorthWest);
    }

    #[test]
    fn demo_map_headings_and_arcs() {
        let map = demo_map();
        let l1 = map.location_index("l1").unwrap();
        let l2 = map.location_index("l2").unwrap();
        let arc = map.arc_between(l1, l2).unwrap();
        assert_eq!(arc.heading, Heading::South);
        assert_eq!(arc.distance_m, 5.0);
        let back = map.arc_between(l2, l1).unwrap();
        assert_eq!(back.heading, Heading::North);

        let l4 = map.location_index("l4").unwrap();
        assert_eq!(map.arc_between(l1, l4).unwrap().heading, Heading::West);
        assert!(map.is_charger(l4));
    }

    #[test]
    fn blocking_is_bidirectional_and_idempotent() {
        let mut map = demo_map();
        let a = map.location_index("l2").unwrap();
        let b = map.location_index("l5").unwrap();
        map.block_arc(a, b);
        map.block_arc(a, b);
        assert!(map.is_blocked(a, b));
        assert!(map.is_blocked(b, a));
        assert_eq!(map.blocked_arcs().len(), 2);
    }

    #[test]
    fn shortest_hop_path_avoids_blocked_arcs() {
        let mut map = demo_map();
        let l1 = map.location_index("l1").unwrap();
        let l5 = map.location_index("l5").unwrap();
        let l2 = map.location_index("l2").unwrap();
        let direct = map.shortest_hop_path(l1, l5).unwrap();
        assert_eq!(direct.len(), 3); // l1 l2 l5
        map.block_arc(l2, l5);
        let detour = map.shortest_hop_path(l1, l5).unwrap();
        assert_eq!(detour.len(), 4); // l1 l2 l3 l5
        let ignoring = map.shortest_hop_path_filtered(l1, l5, false).unwrap();
        assert_eq!(ignoring.len(), 3);
    }

    #[test]
    fn map_file_round_trip() {
        let map = demo_map();
        let file = map.to_map_file();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: MapFile = serde_json::from_str(&json).unwrap();
        let rebuilt = EnvironmentMap::from_map_file(&parsed).unwrap();
        assert_eq!(rebuilt, map);
    }

    #[test]
    fn map_validation_errors() {
        let loc = |name: &str| Location { name: name.into(), x: 0.0, y: 0.0, charger: false };
        let err = EnvironmentMap::new(
            vec![loc("a"), loc("b")],
            &[("a".into(), "c".into(), 1.0)],
        );
        assert!(matches!(err, Err(PlanError::InvalidMap(_))));
        let err = EnvironmentMap::new(
            vec![loc("a"), loc("b")],
            &[("a".into(), "b".into(), -1.0)],
        );
        assert!(matches!(err, Err(PlanError::InvalidMap(_))));
    }

    #[test]
    fn grid_map_shape() {
        let map = demo_grid(4, 4);
        assert_eq!(map.locations().len(), 16);
        assert!(map.is_charger(0));
        assert!(map.is_charger(15));
        // interior node has 4 neighbors
        let l6 = map.location_index("l6").unwrap();
        assert_eq!(map.arcs_from(l6).count(), 4);
        // horizontal arcs are 5 m, vertical 3 m
        let l5 = map.location_index("l5").unwrap();
        let l1 = map.location_index("l1").unwrap();
        let l2 = map.location_index("l2").unwrap();
        assert_eq!(map.arc_between(l1, l2).unwrap().distance_m, 5.0);
        assert_eq!(map.arc_between(l1, l5).unwrap().distance_m, 3.0);
        assert_eq!(map.arc_between(l1, l5).unwrap().heading, Heading::South);
    }
}
