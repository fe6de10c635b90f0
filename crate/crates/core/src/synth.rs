//! Seeded generator of labeled synthetic consumer populations.
//!
//! Every meter gets one reading per hour of the chosen year. A reading is the
//! class template for the day's context and hour, times a seasonal multiplier,
//! times `1 + N(0, noise_sd)`, clamped at zero. Hourly noise averages out in
//! the RLP, so on top of it each meter carries persistent habits controlled by
//! [`Heterogeneity`]: a few meters get an idiosyncratic jitter of their
//! template, some households are away for part of a season, and cabins are
//! not occupied every day of their season. [`Heterogeneity::none`] gives the
//! plain template-plus-noise model.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::calendar::{classify_day, DayContext, DayType, HolidayCalendar, Season, SeasonConfig};
use crate::ingest::{ConsumptionSeries, HourStamp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid population spec: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConsumerClass {
    Household,
    HouseholdFlatSeason,
    CabinSummerOff,
    CabinWinterOff,
    Lighting,
    FlatIndustrial,
    NoisePV,
}

impl ConsumerClass {
    pub const ALL: [ConsumerClass; 7] = [
        ConsumerClass::Household,
        ConsumerClass::HouseholdFlatSeason,
        ConsumerClass::CabinSummerOff,
        ConsumerClass::CabinWinterOff,
        ConsumerClass::Lighting,
        ConsumerClass::FlatIndustrial,
        ConsumerClass::NoisePV,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ConsumerClass::Household => "household",
            ConsumerClass::HouseholdFlatSeason => "household-flat-season",
            ConsumerClass::CabinSummerOff => "cabin-summer-off",
            ConsumerClass::CabinWinterOff => "cabin-winter-off",
            ConsumerClass::Lighting => "lighting",
            ConsumerClass::FlatIndustrial => "flat-industrial",
            ConsumerClass::NoisePV => "noise-pv",
        }
    }

    fn is_cabin(self) -> bool {
        matches!(
            self,
            ConsumerClass::CabinSummerOff | ConsumerClass::CabinWinterOff
        )
    }

    fn off_season(self) -> Option<Season> {
        match self {
            ConsumerClass::CabinSummerOff => Some(Season::Summer),
            ConsumerClass::CabinWinterOff => Some(Season::Winter),
            _ => None,
        }
    }

    fn is_household(self) -> bool {
        matches!(
            self,
            ConsumerClass::Household | ConsumerClass::HouseholdFlatSeason
        )
    }
}

impl fmt::Display for ConsumerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConsumerClass {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConsumerClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SynthError::Invalid(format!("unknown class '{s}'")))
    }
}

/// Persistent per-meter deviations from the class template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Heterogeneity {
    /// Share of meters with idiosyncratic habits.
    pub atypical_fraction: f64,
    /// Relative sd of an idiosyncratic meter's fixed per-(context, hour)
    /// template factor.
    pub atypical_shape_sd: f64,
    /// Share of households that spend part of one season elsewhere. The
    /// absence is a single stretch covering a uniform (0, 0.9) share of the
    /// season.
    pub absence_fraction: f64,
    /// Lower bound of a cabin's in-season occupancy rate. Weekday and weekend
    /// rates are drawn independently as `1 - (1 - min) * u^2`, `u ~ U(0, 1)`,
    /// so most cabins are in use on most days.
    pub cabin_min_occupancy: f64,
}

impl Heterogeneity {
    pub fn none() -> Self {
        Heterogeneity {
            atypical_fraction: 0.0,
            atypical_shape_sd: 0.0,
            absence_fraction: 0.0,
            cabin_min_occupancy: 1.0,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let fractions = [
            self.atypical_fraction,
            self.absence_fraction,
            self.cabin_min_occupancy,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(SynthError::Invalid("fractions must lie in [0, 1]".into()));
        }
        if !self.atypical_shape_sd.is_finite() || self.atypical_shape_sd < 0.0 {
            return Err(SynthError::Invalid(
                "shape sd must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Heterogeneity {
    fn default() -> Self {
        Heterogeneity {
            atypical_fraction: 0.05,
            atypical_shape_sd: 0.5,
            absence_fraction: 0.1,
            cabin_min_occupancy: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationSpec {
    pub year: i32,
    /// Meter count per class, indexed by [`ConsumerClass::index`].
    pub counts: [usize; 7],
    pub noise_sd: f64,
    pub seed: u64,
    pub heterogeneity: Heterogeneity,
}

impl PopulationSpec {
    pub fn new(year: i32, seed: u64) -> Self {
        PopulationSpec {
            year,
            counts: [0; 7],
            noise_sd: 0.15,
            seed,
            heterogeneity: Heterogeneity::default(),
        }
    }

    pub fn with_count(mut self, class: ConsumerClass, n: usize) -> Self {
        self.counts[class.index()] = n;
        self
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Self {
        self.noise_sd = sd;
        self
    }

    pub fn with_heterogeneity(mut self, h: Heterogeneity) -> Self {
        self.heterogeneity = h;
        self
    }

    pub fn count(&self, class: ConsumerClass) -> usize {
        self.counts[class.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.total() == 0 {
            return Err(SynthError::EmptyPopulation);
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return Err(SynthError::Invalid(
                "noise_sd must be finite and >= 0".into(),
            ));
        }
        if NaiveDate::from_ymd_opt(self.year, 1, 1).is_none() {
            return Err(SynthError::Invalid(format!(
                "year {} out of range",
                self.year
            )));
        }
        self.heterogeneity.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSeries {
    pub series: ConsumptionSeries,
    pub label: ConsumerClass,
}

const HOUSEHOLD_WEEKDAY: [f64; 24] = [
    0.25, 0.22, 0.2, 0.2, 0.2, 0.25, 0.4, 0.7, 0.75, 0.7, 0.45, 0.4, 0.42, 0.4, 0.38, 0.4, 0.5,
    0.85, 1.0, 1.0, 0.95, 0.9, 0.6, 0.35,
];
const HOUSEHOLD_WEEKEND: [f64; 24] = [
    0.3, 0.25, 0.22, 0.2, 0.2, 0.2, 0.25, 0.4, 0.7, 0.75, 0.7, 0.6, 0.6, 0.55, 0.5, 0.5, 0.55,
    0.85, 1.0, 1.0, 0.95, 0.9, 0.65, 0.4,
];
const WINTER_MULTIPLIER: f64 = 1.8;
/// Standby level of an unoccupied cabin or an absent household, as a
/// fraction of the occupied peak.
const STANDBY: f64 = 0.01;
const INDUSTRIAL_WEEKEND: f64 = 0.3;
/// Longest seasonal absence of a household, as a share of the season.
const MAX_ABSENCE: f64 = 0.9;

fn household_shape(daytype: DayType, hour: usize) -> f64 {
    match daytype {
        DayType::Weekday => HOUSEHOLD_WEEKDAY[hour],
        DayType::Weekend => HOUSEHOLD_WEEKEND[hour],
    }
}

fn lighting_on(season: Season, hour: usize) -> bool {
    match season {
        Season::Winter => hour >= 16 || hour <= 8,
        Season::Summer => hour >= 22 || hour <= 4,
    }
}

/// Noise-free template value of `class` in `ctx` at `hour`.
pub fn base_profile(class: ConsumerClass, ctx: DayContext, hour: usize) -> f64 {
    let season = ctx.season();
    let daytype = ctx.daytype();
    match class {
        ConsumerClass::Household => {
            let m = if season == Season::Winter {
                WINTER_MULTIPLIER
            } else {
                1.0
            };
            household_shape(daytype, hour) * m
        }
        ConsumerClass::HouseholdFlatSeason => household_shape(daytype, hour),
        ConsumerClass::CabinSummerOff => match season {
            Season::Summer => STANDBY * WINTER_MULTIPLIER,
            Season::Winter => household_shape(daytype, hour) * WINTER_MULTIPLIER,
        },
        ConsumerClass::CabinWinterOff => match season {
            Season::Winter => STANDBY,
            Season::Summer => household_shape(daytype, hour),
        },
        ConsumerClass::Lighting => {
            if lighting_on(season, hour) {
                1.0
            } else {
                0.0
            }
        }
        ConsumerClass::FlatIndustrial => match daytype {
            DayType::Weekday if (6..=18).contains(&hour) => 1.0,
            _ => INDUSTRIAL_WEEKEND,
        },
        ConsumerClass::NoisePV => 0.5,
    }
}

fn class_peak(class: ConsumerClass) -> f64 {
    DayContext::ALL
        .iter()
        .flat_map(|&c| (0..24).map(move |h| base_profile(class, c, h)))
        .fold(0.0, f64::max)
}

struct Day {
    date: NaiveDate,
    ctx: DayContext,
    /// Position of the day within the year's days of its season, in [0, 1).
    season_pos: f64,
}

struct MeterHabits {
    factors: [[f64; 24]; 4],
    away_season: Option<Season>,
    away_rate: f64,
    away_phase: f64,
    /// Occupancy rate per day type; 1 for everything but cabins.
    occupancy: [f64; 2],
}

impl MeterHabits {
    fn vacant(&self, rng: &mut ChaCha8Rng, class: ConsumerClass, day: &Day) -> bool {
        let ctx = day.ctx;
        if self.away_season == Some(ctx.season()) {
            // One contiguous absence covering `away_rate` of the season.
            return (day.season_pos - self.away_phase).rem_euclid(1.0) < self.away_rate;
        }
        if class.is_cabin() && class.off_season() != Some(ctx.season()) {
            let rate = match ctx.daytype() {
                DayType::Weekday => self.occupancy[0],
                DayType::Weekend => self.occupancy[1],
            };
            return rng.random::<f64>() >= rate;
        }
        false
    }
}

fn draw_habits(rng: &mut ChaCha8Rng, class: ConsumerClass, h: &Heterogeneity) -> MeterHabits {
    let atypical = rng.random::<f64>() < h.atypical_fraction;
    let mut factors = [[1.0; 24]; 4];
    if atypical && h.atypical_shape_sd > 0.0 {
        let normal = Normal::new(0.0, h.atypical_shape_sd).expect("finite sd");
        for row in factors.iter_mut() {
            for f in row.iter_mut() {
                *f = (1.0 + normal.sample(rng)).max(0.0);
            }
        }
    }
    let mut away_season = None;
    let mut away_rate = 0.0;
    let mut away_phase = 0.0;
    if class.is_household() && rng.random::<f64>() < h.absence_fraction {
        away_season = Some(if rng.random::<bool>() {
            Season::Summer
        } else {
            Season::Winter
        });
        away_rate = rng.random::<f64>() * MAX_ABSENCE;
        away_phase = rng.random::<f64>();
    }
    let mut occupancy = [1.0; 2];
    if class.is_cabin() && h.cabin_min_occupancy < 1.0 {
        for o in occupancy.iter_mut() {
            let u: f64 = rng.random();
            *o = 1.0 - (1.0 - h.cabin_min_occupancy) * u * u;
        }
    }
    MeterHabits {
        factors,
        away_season,
        away_rate,
        away_phase,
        occupancy,
    }
}

fn meter_id(index: usize) -> String {
    format!("m{:05}", index + 1)
}

fn generate_meter(
    spec: &PopulationSpec,
    index: usize,
    class: ConsumerClass,
    days: &[Day],
) -> LabeledSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let habits = draw_habits(&mut rng, class, &spec.heterogeneity);
    let noise = (spec.noise_sd > 0.0).then(|| Normal::new(0.0, spec.noise_sd).expect("finite sd"));
    let standby = STANDBY * class_peak(class);

    let mut readings = Vec::with_capacity(days.len() * 24);
    for day in days {
        let (date, ctx) = (day.date, day.ctx);
        let away = habits.vacant(&mut rng, class, day);
        for hour in 0..24 {
            let value = if class == ConsumerClass::NoisePV {
                rng.random_range(0.5..1.0)
            } else {
                let base = if away {
                    standby
                } else {
                    base_profile(class, ctx, hour) * habits.factors[ctx.index()][hour]
                };
                let eps = noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
                (base * (1.0 + eps)).max(0.0)
            };
            let stamp = HourStamp::new(date, hour as u8).expect("hour below 24");
            readings.push((stamp, value));
        }
    }
    let series = ConsumptionSeries::from_readings(meter_id(index), readings)
        .expect("generated readings are finite, nonnegative and unique");
    LabeledSeries {
        series,
        label: class,
    }
}

/// Generates the population described by `spec`. Meters are numbered in class
/// order (`m00001`, `m00002`, ...); each draws from its own random stream, so
/// the output depends only on the spec.
pub fn generate_population(spec: &PopulationSpec) -> Result<Vec<LabeledSeries>, SynthError> {
    spec.validate()?;
    let seasons = SeasonConfig::default();
    let holidays = HolidayCalendar::norwegian();
    let start = NaiveDate::from_ymd_opt(spec.year, 1, 1).expect("validated year");
    let dates: Vec<NaiveDate> = (0..)
        .map(|i| start + Duration::days(i))
        .take_while(|d| d.year() == spec.year)
        .collect();
    let season_len = |s: Season| {
        dates
            .iter()
            .filter(|d| seasons.season_of_month(d.month()) == s)
            .count()
    };
    let lens = [season_len(Season::Summer), season_len(Season::Winter)];
    let mut seen = [0usize; 2];
    let days: Vec<Day> = dates
        .iter()
        .map(|&date| {
            let ctx = classify_day(date, &seasons, &holidays);
            let s = (ctx.season() == Season::Winter) as usize;
            let season_pos = seen[s] as f64 / lens[s] as f64;
            seen[s] += 1;
            Day {
                date,
                ctx,
                season_pos,
            }
        })
        .collect();
    let classes: Vec<ConsumerClass> = ConsumerClass::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, spec.count(c)))
        .collect();
    Ok(classes
        .par_iter()
        .enumerate()
        .map(|(i, &c)| generate_meter(spec, i, c, &days))
        .collect())
}

/// Writes the `meter_id,label` ground-truth file.
pub fn write_labels<W: Write>(out: W, population: &[LabeledSeries]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "meter_id,label")?;
    for m in population {
        writeln!(w, "{},{}", m.series.meter_id(), m.label)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn households(n: usize) -> PopulationSpec {
        PopulationSpec::new(2012, 7).with_count(ConsumerClass::Household, n)
    }

    #[test]
    fn full_year_coverage() {
        let pop = generate_population(&households(5)).unwrap();
        assert_eq!(pop.len(), 5);
        for m in &pop {
            assert_eq!(m.label, ConsumerClass::Household);
            assert_eq!(m.series.len(), 8784);
        }
        let pop = generate_population(
            &PopulationSpec::new(2013, 7).with_count(ConsumerClass::Lighting, 1),
        )
        .unwrap();
        assert_eq!(pop[0].series.len(), 8760);
    }

    #[test]
    fn empty_and_invalid_specs() {
        assert_eq!(
            generate_population(&PopulationSpec::new(2012, 1)),
            Err(SynthError::EmptyPopulation)
        );
        assert!(generate_population(&households(1).with_noise_sd(-0.1)).is_err());
        let mut h = Heterogeneity::none();
        h.absence_fraction = 1.5;
        assert!(generate_population(&households(1).with_heterogeneity(h)).is_err());
    }

    #[test]
    fn deterministic_and_ids_in_class_order() {
        let spec = households(3).with_count(ConsumerClass::NoisePV, 2);
        let a = generate_population(&spec).unwrap();
        let b = generate_population(&spec).unwrap();
        assert_eq!(a, b);
        let ids: Vec<&str> = a.iter().map(|m| m.series.meter_id()).collect();
        assert_eq!(ids, ["m00001", "m00002", "m00003", "m00004", "m00005"]);
        assert_eq!(a[4].label, ConsumerClass::NoisePV);
    }

    #[test]
    fn noise_free_values_follow_templates() {
        let spec = PopulationSpec::new(2012, 3)
            .with_count(ConsumerClass::Lighting, 1)
            .with_count(ConsumerClass::FlatIndustrial, 1)
            .with_noise_sd(0.0)
            .with_heterogeneity(Heterogeneity::none());
        let pop = generate_population(&spec).unwrap();
        let at = |m: &LabeledSeries, d: &str, h: u8| {
            let date = NaiveDate::parse_from_str(d, "%Y-%m-%d").unwrap();
            m.series.readings()[&HourStamp::new(date, h).unwrap()]
        };
        // 2012-07-04 is a summer Wednesday, 2012-01-07 a winter Saturday.
        assert_eq!(at(&pop[0], "2012-07-04", 23), 1.0);
        assert_eq!(at(&pop[0], "2012-07-04", 12), 0.0);
        assert_eq!(at(&pop[0], "2012-01-07", 16), 1.0);
        assert_eq!(at(&pop[0], "2012-01-07", 9), 0.0);
        assert_eq!(at(&pop[1], "2012-07-04", 6), 1.0);
        assert_eq!(at(&pop[1], "2012-07-04", 19), 0.3);
        assert_eq!(at(&pop[1], "2012-01-07", 12), 0.3);
    }

    #[test]
    fn household_template_has_larger_evening_peak() {
        let ctx = DayContext::ALL[0];
        let morning = (7..=9).map(|h| base_profile(ConsumerClass::Household, ctx, h));
        let evening = (17..=21).map(|h| base_profile(ConsumerClass::Household, ctx, h));
        assert!(evening.fold(0.0, f64::max) > morning.fold(0.0, f64::max));
        let w = DayContext::ALL[2];
        assert_eq!(
            base_profile(ConsumerClass::Household, w, 18),
            1.8 * base_profile(ConsumerClass::Household, ctx, 18)
        );
        assert_eq!(
            base_profile(ConsumerClass::HouseholdFlatSeason, w, 18),
            base_profile(ConsumerClass::HouseholdFlatSeason, ctx, 18)
        );
    }

    #[test]
    fn class_names_round_trip() {
        for c in ConsumerClass::ALL {
            assert_eq!(c.name().parse::<ConsumerClass>().unwrap(), c);
        }
        assert!("cabin".parse::<ConsumerClass>().is_err());
    }

    #[test]
    fn labels_csv() {
        let pop = generate_population(&households(2)).unwrap();
        let mut buf = Vec::new();
        write_labels(&mut buf, &pop).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "meter_id,label\nm00001,household\nm00002,household\n"
        );
    }
}
