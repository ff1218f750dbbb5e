//! Problem-instance data model: tasks, UAVs, ground control stations,
//! no-fly zones and task dependencies, plus instance validation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 3D geographic coordinate: degrees of longitude/latitude, altitude in feet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint {
    #[serde(rename = "longitude")]
    pub lon: f64,
    #[serde(rename = "latitude")]
    pub lat: f64,
    #[serde(rename = "altitude", default)]
    pub alt: f64,
}

impl GeoPoint {
    pub const fn new(lon: f64, lat: f64, alt: f64) -> Self {
        Self { lon, lat, alt }
    }

    /// Surface point (altitude 0).
    pub const fn surface(lon: f64, lat: f64) -> Self {
        Self { lon, lat, alt: 0.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.lon.is_finite()
            && self.lat.is_finite()
            && self.alt.is_finite()
            && (-180.0..=180.0).contains(&self.lon)
            && (-90.0..=90.0).contains(&self.lat)
            && self.alt >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    EoirVideo,
    EoirThermal,
    EoirPlain,
    Sar,
    Isar,
    Mpr,
}

impl SensorKind {
    pub const ALL: [SensorKind; 6] = [
        SensorKind::EoirVideo,
        SensorKind::EoirThermal,
        SensorKind::EoirPlain,
        SensorKind::Sar,
        SensorKind::Isar,
        SensorKind::Mpr,
    ];

    pub fn is_eoir(self) -> bool {
        matches!(
            self,
            SensorKind::EoirVideo | SensorKind::EoirThermal | SensorKind::EoirPlain
        )
    }
}

/// Sensors a UAV can effectively offer once EO/IR subsumption is applied.
///
/// A plain EO/IR requirement is met by any EO/IR variant, and a UAV that
/// lists a plain EO/IR sensor meets the video and thermal requirements.
pub fn effective_sensors(sensors: &[SensorKind]) -> Vec<SensorKind> {
    let mut out: Vec<SensorKind> = sensors.to_vec();
    if sensors
        .iter()
        .any(|s| matches!(s, SensorKind::EoirVideo | SensorKind::EoirThermal))
    {
        out.push(SensorKind::EoirPlain);
    }
    if sensors.contains(&SensorKind::EoirPlain) {
        out.push(SensorKind::EoirVideo);
        out.push(SensorKind::EoirThermal);
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaskKind {
    /// Monitoring a zone.
    Mon,
    /// Escorting along a path.
    Es,
    /// Target photographing.
    Tp,
    /// Mapping a zone.
    Map,
}

impl TaskKind {
    pub fn allows_multi_uav(self) -> bool {
        self == TaskKind::Map
    }
}

/// Sensors that can perform a task of the given kind.
pub fn task_sensor_set(kind: TaskKind) -> &'static [SensorKind] {
    match kind {
        TaskKind::Mon => &[SensorKind::EoirVideo, SensorKind::Isar],
        TaskKind::Es => &[SensorKind::EoirThermal, SensorKind::Sar],
        TaskKind::Tp => &[SensorKind::EoirPlain],
        TaskKind::Map => &[SensorKind::Sar, SensorKind::Isar, SensorKind::Mpr],
    }
}

/// Sensors of `uav_sensors` usable for a task of `kind`, in canonical order.
pub fn usable_sensors(kind: TaskKind, uav_sensors: &[SensorKind]) -> Vec<SensorKind> {
    let effective = effective_sensors(uav_sensors);
    task_sensor_set(kind)
        .iter()
        .copied()
        .filter(|s| effective.contains(s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Zone {
    Point { at: GeoPoint },
    Polyline { points: Vec<GeoPoint> },
    Polygon { vertices: Vec<GeoPoint> },
}

impl Zone {
    pub fn vertices(&self) -> &[GeoPoint] {
        match self {
            Zone::Point { at } => std::slice::from_ref(at),
            Zone::Polyline { points } => points,
            Zone::Polygon { vertices } => vertices,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeWindow {
    /// Start and end are fixed (hours from mission start).
    Fixed { start: f64, end: f64 },
    /// Only the duration is known; start/end come out of planning.
    DurationOnly { duration: f64 },
    /// Neither; the duration follows from the task geometry.
    Free {},
}

impl TimeWindow {
    pub fn is_fixed(&self) -> bool {
        matches!(self, TimeWindow::Fixed { .. })
    }

    pub fn duration(&self) -> Option<f64> {
        match *self {
            TimeWindow::Fixed { start, end } => Some(end - start),
            TimeWindow::DurationOnly { duration } => Some(duration),
            TimeWindow::Free {} => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub kind: TaskKind,
    pub zone: Zone,
    pub window: TimeWindow,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub multi_uav: bool,
    /// Number of UAVs for a multi-UAV task; defaults to 2 when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_uavs: Option<usize>,
}

impl TaskSpec {
    pub fn required_uav_count(&self) -> usize {
        if self.multi_uav {
            self.required_uavs.unwrap_or(2)
        } else {
            1
        }
    }

    pub fn compatible_sensors(&self) -> &'static [SensorKind] {
        task_sensor_set(self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Route,
    Climb,
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightProfile {
    pub id: String,
    pub kind: ProfileKind,
    /// Knots.
    pub speed: f64,
    /// kg per hour.
    pub fuel_ratio: f64,
    /// Feet, route profiles only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude: Option<f64>,
    /// Degrees, climb/descent profiles only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum UavType {
    Urav,
    Male,
    Hale,
    Ucav,
}

impl UavType {
    pub const ALL: [UavType; 4] = [UavType::Urav, UavType::Male, UavType::Hale, UavType::Ucav];

    pub fn as_str(self) -> &'static str {
        match self {
            UavType::Urav => "URAV",
            UavType::Male => "MALE",
            UavType::Hale => "HALE",
            UavType::Ucav => "UCAV",
        }
    }
}

impl fmt::Display for UavType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown UAV type `{0}`")]
pub struct UnknownUavType(pub String);

impl FromStr for UavType {
    type Err = UnknownUavType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UavType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownUavType(s.to_string()))
    }
}

/// Optimum operating point of one sensor on one UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorPerformance {
    pub sensor: SensorKind,
    /// Knots.
    pub speed: f64,
    /// Feet.
    pub altitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSpec {
    pub id: String,
    pub uav_type: UavType,
    pub position: GeoPoint,
    /// kg.
    pub initial_fuel: f64,
    pub sensors: Vec<SensorKind>,
    /// Nautical miles.
    pub range: f64,
    /// Hours.
    pub autonomy: f64,
    pub cost_per_hour: f64,
    /// Knots.
    pub max_speed: f64,
    /// Feet.
    pub max_altitude: f64,
    /// kg.
    pub max_fuel: f64,
    pub profiles: Vec<FlightProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sensor_performance: Vec<SensorPerformance>,
}

impl UavSpec {
    /// Task-execution speed when operating `sensor`; half the maximum speed
    /// unless the scenario overrides it.
    pub fn optimum_speed(&self, sensor: SensorKind) -> f64 {
        self.sensor_performance
            .iter()
            .find(|p| p.sensor == sensor)
            .map_or(0.5 * self.max_speed, |p| p.speed)
    }

    pub fn optimum_altitude(&self, sensor: SensorKind) -> f64 {
        self.sensor_performance
            .iter()
            .find(|p| p.sensor == sensor)
            .map_or(0.5 * self.max_altitude, |p| p.altitude)
    }

    pub fn effective_sensors(&self) -> Vec<SensorKind> {
        effective_sensors(&self.sensors)
    }

    pub fn can_perform(&self, kind: TaskKind) -> bool {
        !usable_sensors(kind, &self.sensors).is_empty()
    }

    pub fn max_profile_speed(&self) -> f64 {
        self.profiles.iter().map(|p| p.speed).fold(0.0, f64::max)
    }

    /// Index of the profile with the lowest fuel ratio (first on ties).
    pub fn min_fuel_profile(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.profiles.iter().enumerate() {
            if p.fuel_ratio < self.profiles[best].fuel_ratio {
                best = i;
            }
        }
        best
    }
}

/// Builds a UAV from the type catalog with its two default route profiles.
pub fn catalog_uav(uav_type: UavType, id: &str, position: GeoPoint, fuel: Option<f64>) -> UavSpec {
    use SensorKind::*;
    // range NM, autonomy h, cost/h, max speed kt, max altitude ft, max fuel kg, sensors
    let (range, autonomy, cost, max_speed, max_altitude, max_fuel, sensors): (
        f64,
        f64,
        f64,
        f64,
        f64,
        f64,
        &[SensorKind],
    ) = match uav_type {
        UavType::Urav => (
            1000.0,
            20.0,
            5.0,
            120.0,
            20000.0,
            500.0,
            &[EoirVideo, EoirThermal],
        ),
        UavType::Male => (
            5000.0,
            30.0,
            10.0,
            250.0,
            40000.0,
            2500.0,
            &[EoirPlain, Mpr],
        ),
        UavType::Hale => (
            15000.0,
            40.0,
            15.0,
            400.0,
            65000.0,
            6000.0,
            &[EoirVideo, Isar],
        ),
        UavType::Ucav => (
            1500.0,
            15.0,
            25.0,
            450.0,
            35000.0,
            9000.0,
            &[EoirPlain, Sar],
        ),
    };
    let route_altitude = 0.8 * max_altitude;
    let profiles = vec![
        FlightProfile {
            id: "min-consumption".into(),
            kind: ProfileKind::Route,
            speed: 0.6 * max_speed,
            fuel_ratio: max_fuel / (1.1 * autonomy),
            altitude: Some(route_altitude),
            angle: None,
        },
        FlightProfile {
            id: "max-speed".into(),
            kind: ProfileKind::Route,
            speed: max_speed,
            fuel_ratio: max_fuel / (0.55 * autonomy),
            altitude: Some(route_altitude),
            angle: None,
        },
    ];
    UavSpec {
        id: id.to_string(),
        uav_type,
        position,
        initial_fuel: fuel.unwrap_or(max_fuel),
        sensors: sensors.to_vec(),
        range,
        autonomy,
        cost_per_hour: cost,
        max_speed,
        max_altitude,
        max_fuel,
        profiles,
        sensor_performance: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcsSpec {
    pub id: String,
    pub position: GeoPoint,
    pub max_uavs: usize,
    pub permitted_types: Vec<UavType>,
    /// Nautical miles.
    pub coverage: f64,
}

/// Qualitative interval relations, including inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllenRelation {
    Before,
    Meets,
    Overlaps,
    Starts,
    During,
    Finishes,
    Equals,
    After,
    MetBy,
    OverlappedBy,
    StartedBy,
    Contains,
    FinishedBy,
}

const EPS: f64 = 1e-9;

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

fn leq(a: f64, b: f64) -> bool {
    a <= b || approx_eq(a, b)
}

impl AllenRelation {
    /// Whether intervals `i = (start, end)` and `j` stand in this relation.
    pub fn holds(self, i: (f64, f64), j: (f64, f64)) -> bool {
        use AllenRelation::*;
        let ((si, ei), (sj, ej)) = (i, j);
        match self {
            Before => leq(ei, sj),
            Meets => approx_eq(ei, sj),
            Overlaps => leq(si, sj) && leq(sj, ei) && leq(ei, ej),
            Starts => approx_eq(si, sj) && leq(ei, ej),
            During => leq(sj, si) && leq(ei, ej),
            Finishes => leq(sj, si) && approx_eq(ei, ej),
            Equals => approx_eq(si, sj) && approx_eq(ei, ej),
            After => Before.holds(j, i),
            MetBy => Meets.holds(j, i),
            OverlappedBy => Overlaps.holds(j, i),
            StartedBy => Starts.holds(j, i),
            Contains => During.holds(j, i),
            FinishedBy => Finishes.holds(j, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dependency {
    Time {
        first: String,
        second: String,
        relation: AllenRelation,
    },
    SameUav {
        first: String,
        second: String,
    },
    DiffUav {
        first: String,
        second: String,
    },
}

impl Dependency {
    pub fn tasks(&self) -> (&str, &str) {
        match self {
            Dependency::Time { first, second, .. }
            | Dependency::SameUav { first, second }
            | Dependency::DiffUav { first, second } => (first, second),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoFlyZone {
    pub id: String,
    pub polygon: Vec<GeoPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Region {
    pub fn contains(&self, p: &GeoPoint) -> bool {
        (self.min_lon..=self.max_lon).contains(&p.lon)
            && (self.min_lat..=self.max_lat).contains(&p.lat)
    }

    pub fn width(&self) -> f64 {
        self.max_lon - self.min_lon
    }

    pub fn height(&self) -> f64 {
        self.max_lat - self.min_lat
    }
}

fn default_swath() -> f64 {
    1.0
}

fn is_default_swath(v: &f64) -> bool {
    *v == default_swath()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionScenario {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub region: Region,
    pub tasks: Vec<TaskSpec>,
    pub uavs: Vec<UavSpec>,
    pub gcss: Vec<GcsSpec>,
    #[serde(default)]
    pub nfzs: Vec<NoFlyZone>,
    #[serde(default)]
    pub dependencies: Vec<Dependency>,
    /// Sweep spacing of mapping patterns, nautical miles.
    #[serde(default = "default_swath", skip_serializing_if = "is_default_swath")]
    pub map_swath_nm: f64,
}

impl MissionScenario {
    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    EmptyTasks,
    EmptyUavs,
    EmptyGcss,
    InvalidRegion,
    InvalidCoordinate,
    OutsideRegion,
    DuplicateId,
    MultiUavKind,
    InvalidUavCount,
    ZoneShape,
    InvalidWindow,
    InvalidProfile,
    InvalidUav,
    InvalidGcs,
    UnknownTask,
    SelfDependency,
    InvalidNfz,
    InvalidParameter,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        use IssueCode::*;
        match self {
            EmptyTasks => "empty-tasks",
            EmptyUavs => "empty-uavs",
            EmptyGcss => "empty-gcss",
            InvalidRegion => "invalid-region",
            InvalidCoordinate => "invalid-coordinate",
            OutsideRegion => "outside-region",
            DuplicateId => "duplicate-id",
            MultiUavKind => "multi-uav-kind",
            InvalidUavCount => "invalid-uav-count",
            ZoneShape => "zone-shape",
            InvalidWindow => "invalid-window",
            InvalidProfile => "invalid-profile",
            InvalidUav => "invalid-uav",
            InvalidGcs => "invalid-gcs",
            UnknownTask => "unknown-task",
            SelfDependency => "self-dependency",
            InvalidNfz => "invalid-nfz",
            InvalidParameter => "invalid-parameter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioIssue {
    pub code: IssueCode,
    pub message: String,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

struct Issues(Vec<ScenarioIssue>);

impl Issues {
    fn push(&mut self, code: IssueCode, message: impl Into<String>) {
        self.0.push(ScenarioIssue {
            code,
            message: message.into(),
        });
    }

    fn point(&mut self, region: &Region, p: &GeoPoint, what: &str) {
        if !p.is_valid() {
            self.push(
                IssueCode::InvalidCoordinate,
                format!("{what}: invalid coordinate {p:?}"),
            );
        } else if !region.contains(p) {
            self.push(
                IssueCode::OutsideRegion,
                format!("{what}: point outside region"),
            );
        }
    }

    fn unique<'a>(&mut self, what: &str, ids: impl IntoIterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.push(
                    IssueCode::DuplicateId,
                    format!("duplicate id `{id}` among {what}"),
                );
            }
        }
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Reports every invariant violation of a scenario; an empty list means valid.
pub fn validate_scenario(s: &MissionScenario) -> Vec<ScenarioIssue> {
    use IssueCode::*;
    let mut out = Issues(Vec::new());
    let r = &s.region;

    if s.tasks.is_empty() {
        out.push(EmptyTasks, "scenario has no tasks");
    }
    if s.uavs.is_empty() {
        out.push(EmptyUavs, "scenario has no UAVs");
    }
    if s.gcss.is_empty() {
        out.push(EmptyGcss, "scenario has no ground control stations");
    }
    let region_ok = [r.min_lon, r.max_lon]
        .iter()
        .all(|v| (-180.0..=180.0).contains(v))
        && [r.min_lat, r.max_lat]
            .iter()
            .all(|v| (-90.0..=90.0).contains(v))
        && r.min_lon < r.max_lon
        && r.min_lat < r.max_lat;
    if !region_ok {
        out.push(
            InvalidRegion,
            format!("region bounds are not a valid box: {r:?}"),
        );
    }
    if !positive(s.map_swath_nm) {
        out.push(InvalidParameter, "map_swath_nm must be positive");
    }

    out.unique("tasks", s.tasks.iter().map(|t| t.id.as_str()));
    out.unique("uavs", s.uavs.iter().map(|u| u.id.as_str()));
    out.unique("gcss", s.gcss.iter().map(|g| g.id.as_str()));
    out.unique("nfzs", s.nfzs.iter().map(|z| z.id.as_str()));

    for t in &s.tasks {
        let what = format!("task `{}`", t.id);
        if t.multi_uav && !t.kind.allows_multi_uav() {
            out.push(MultiUavKind, format!("{what}: multiUav only for MAP"));
        }
        match (t.multi_uav, t.required_uavs) {
            (false, Some(n)) if n != 1 => out.push(
                InvalidUavCount,
                format!("{what}: single-UAV task requires {n} UAVs"),
            ),
            (true, Some(0)) => out.push(InvalidUavCount, format!("{what}: requires zero UAVs")),
            _ => {}
        }
        if t.required_uav_count() > s.uavs.len() {
            out.push(
                InvalidUavCount,
                format!(
                    "{what}: requires {} UAVs but the fleet has {}",
                    t.required_uav_count(),
                    s.uavs.len()
                ),
            );
        }
        let shape_ok = match (&t.kind, &t.zone) {
            (TaskKind::Tp, Zone::Point { .. }) => true,
            (TaskKind::Es, Zone::Polyline { points }) => points.len() >= 2,
            (TaskKind::Mon | TaskKind::Map, Zone::Polygon { vertices }) => vertices.len() >= 3,
            _ => false,
        };
        if !shape_ok {
            out.push(
                ZoneShape,
                format!("{what}: zone shape does not match task kind {:?}", t.kind),
            );
        }
        for p in t.zone.vertices() {
            out.point(r, p, &what);
        }
        match t.window {
            TimeWindow::Fixed { start, end } => {
                if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
                    out.push(
                        InvalidWindow,
                        format!("{what}: fixed window needs 0 <= start < end"),
                    );
                }
            }
            TimeWindow::DurationOnly { duration } => {
                if !positive(duration) {
                    out.push(InvalidWindow, format!("{what}: duration must be positive"));
                }
            }
            TimeWindow::Free {} => {
                if t.kind == TaskKind::Mon {
                    out.push(
                        InvalidWindow,
                        format!("{what}: monitoring needs a duration"),
                    );
                }
            }
        }
    }

    for u in &s.uavs {
        let what = format!("uav `{}`", u.id);
        out.point(r, &u.position, &what);
        let fields = [
            u.range,
            u.autonomy,
            u.max_speed,
            u.max_altitude,
            u.max_fuel,
            u.initial_fuel,
        ];
        if !fields.iter().all(|v| positive(*v))
            || !(u.cost_per_hour.is_finite() && u.cost_per_hour >= 0.0)
        {
            out.push(
                InvalidUav,
                format!("{what}: numeric features must be positive"),
            );
        }
        if u.initial_fuel > u.max_fuel {
            out.push(
                InvalidUav,
                format!("{what}: initial fuel exceeds tank capacity"),
            );
        }
        if u.sensors.is_empty() {
            out.push(InvalidUav, format!("{what}: carries no sensors"));
        }
        if u.profiles.is_empty() {
            out.push(InvalidProfile, format!("{what}: has no flight profiles"));
        }
        out.unique(
            &format!("profiles of {what}"),
            u.profiles.iter().map(|p| p.id.as_str()),
        );
        for p in &u.profiles {
            if !positive(p.speed) || !positive(p.fuel_ratio) || p.speed > u.max_speed {
                out.push(
                    InvalidProfile,
                    format!(
                        "{what}: profile `{}` needs 0 < speed <= max speed and positive fuel ratio",
                        p.id
                    ),
                );
            }
            if p.altitude
                .is_some_and(|a| !(a.is_finite() && a >= 0.0 && a <= u.max_altitude))
            {
                out.push(
                    InvalidProfile,
                    format!("{what}: profile `{}` altitude out of range", p.id),
                );
            }
        }
        for perf in &u.sensor_performance {
            if !positive(perf.speed) || perf.speed > u.max_speed {
                out.push(InvalidProfile, format!("{what}: sensor speed out of range"));
            }
        }
    }

    for g in &s.gcss {
        let what = format!("gcs `{}`", g.id);
        out.point(r, &g.position, &what);
        if g.max_uavs == 0 || g.permitted_types.is_empty() || !positive(g.coverage) {
            out.push(
                InvalidGcs,
                format!("{what}: needs maxUavs >= 1, permitted types and positive coverage"),
            );
        }
    }

    let task_ids: HashSet<&str> = s.tasks.iter().map(|t| t.id.as_str()).collect();
    for d in &s.dependencies {
        let (a, b) = d.tasks();
        for id in [a, b] {
            if !task_ids.contains(id) {
                out.push(
                    UnknownTask,
                    format!("dependency references unknown task `{id}`"),
                );
            }
        }
        if a == b {
            out.push(
                SelfDependency,
                format!("dependency relates task `{a}` to itself"),
            );
        }
    }

    for z in &s.nfzs {
        let what = format!("nfz `{}`", z.id);
        if z.polygon.len() < 3 {
            out.push(InvalidNfz, format!("{what}: needs at least 3 vertices"));
            continue;
        }
        for p in &z.polygon {
            if !p.is_valid() {
                out.push(
                    InvalidCoordinate,
                    format!("{what}: invalid coordinate {p:?}"),
                );
            }
        }
        if !crate::geo::polygon_is_simple(&z.polygon) {
            out.push(InvalidNfz, format!("{what}: polygon is self-intersecting"));
        }
    }

    out.0
}
