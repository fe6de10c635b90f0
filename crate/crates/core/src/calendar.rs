//! Day classification into the four loading contexts.
//!
//! A civil date is either a weekday or a weekend (Saturdays, Sundays and
//! Norwegian public holidays) and falls in summer or winter according to a
//! configurable inclusive month range.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use thiserror::Error;

/// Lowest year accepted by [`norwegian_holidays`].
pub const MIN_HOLIDAY_YEAR: i32 = 1900;
/// Highest year accepted by [`norwegian_holidays`].
pub const MAX_HOLIDAY_YEAR: i32 = 2100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CalendarError {
    #[error("year {0} outside supported range {MIN_HOLIDAY_YEAR}..={MAX_HOLIDAY_YEAR}")]
    YearOutOfRange(i32),
    #[error("month {0} outside 1..=12")]
    InvalidMonth(u32),
    #[error("summer range {start}..={end} covers every month")]
    SummerCoversYear { start: u32, end: u32 },
    #[error("date {0} is both added and removed")]
    ConflictingOverride(NaiveDate),
    #[error("holiday file line {line}: cannot parse {text:?}")]
    BadOverrideLine { line: usize, text: String },
    #[error("reading holiday file: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Season {
    Summer,
    Winter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DayType {
    Weekday,
    Weekend,
}

/// One of the four loading contexts, in canonical feature order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DayContext {
    SummerWeekday,
    SummerWeekend,
    WinterWeekday,
    WinterWeekend,
}

impl DayContext {
    /// All contexts in the order they occupy inside an RLP vector.
    pub const ALL: [DayContext; 4] = [
        DayContext::SummerWeekday,
        DayContext::SummerWeekend,
        DayContext::WinterWeekday,
        DayContext::WinterWeekend,
    ];

    pub fn new(season: Season, daytype: DayType) -> Self {
        match (season, daytype) {
            (Season::Summer, DayType::Weekday) => DayContext::SummerWeekday,
            (Season::Summer, DayType::Weekend) => DayContext::SummerWeekend,
            (Season::Winter, DayType::Weekday) => DayContext::WinterWeekday,
            (Season::Winter, DayType::Weekend) => DayContext::WinterWeekend,
        }
    }

    pub fn season(self) -> Season {
        match self {
            DayContext::SummerWeekday | DayContext::SummerWeekend => Season::Summer,
            DayContext::WinterWeekday | DayContext::WinterWeekend => Season::Winter,
        }
    }

    pub fn daytype(self) -> DayType {
        match self {
            DayContext::SummerWeekday | DayContext::WinterWeekday => DayType::Weekday,
            DayContext::SummerWeekend | DayContext::WinterWeekend => DayType::Weekend,
        }
    }

    /// Position of this context's 24-hour block inside an RLP.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short column prefix used in RLP files (`swd`, `swe`, `wwd`, `wwe`).
    pub fn column_prefix(self) -> &'static str {
        match self {
            DayContext::SummerWeekday => "swd",
            DayContext::SummerWeekend => "swe",
            DayContext::WinterWeekday => "wwd",
            DayContext::WinterWeekend => "wwe",
        }
    }
}

impl fmt::Display for DayContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DayContext::SummerWeekday => "summer-weekday",
            DayContext::SummerWeekend => "summer-weekend",
            DayContext::WinterWeekday => "winter-weekday",
            DayContext::WinterWeekend => "winter-weekend",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Season::Summer => "summer",
            Season::Winter => "winter",
        })
    }
}

/// Inclusive month range counted as summer. The range may wrap around the
/// new year (e.g. 11..=2); every other month is winter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeasonConfig {
    summer_start_month: u32,
    summer_end_month: u32,
}

impl SeasonConfig {
    pub fn new(summer_start_month: u32, summer_end_month: u32) -> Result<Self, CalendarError> {
        for m in [summer_start_month, summer_end_month] {
            if !(1..=12).contains(&m) {
                return Err(CalendarError::InvalidMonth(m));
            }
        }
        let span = (summer_end_month + 12 - summer_start_month) % 12 + 1;
        if span == 12 {
            return Err(CalendarError::SummerCoversYear {
                start: summer_start_month,
                end: summer_end_month,
            });
        }
        Ok(SeasonConfig {
            summer_start_month,
            summer_end_month,
        })
    }

    pub fn summer_start_month(&self) -> u32 {
        self.summer_start_month
    }

    pub fn summer_end_month(&self) -> u32 {
        self.summer_end_month
    }

    pub fn season_of_month(&self, month: u32) -> Season {
        let (s, e) = (self.summer_start_month, self.summer_end_month);
        let summer = if s <= e {
            (s..=e).contains(&month)
        } else {
            month >= s || month <= e
        };
        if summer {
            Season::Summer
        } else {
            Season::Winter
        }
    }
}

impl Default for SeasonConfig {
    /// May through September is summer.
    fn default() -> Self {
        SeasonConfig {
            summer_start_month: 5,
            summer_end_month: 9,
        }
    }
}

/// Easter Sunday by the Anonymous Gregorian computus (Meeus/Jones/Butcher).
pub fn easter_sunday(year: i32) -> NaiveDate {
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    NaiveDate::from_ymd_opt(year, month as u32, day as u32).expect("computus yields a valid date")
}

fn builtin_holidays(year: i32) -> [NaiveDate; 10] {
    let fixed = |m, d| NaiveDate::from_ymd_opt(year, m, d).expect("fixed holiday");
    let easter = easter_sunday(year);
    let before = |n| {
        easter
            .checked_sub_days(Days::new(n))
            .expect("date in range")
    };
    let after = |n| {
        easter
            .checked_add_days(Days::new(n))
            .expect("date in range")
    };
    [
        fixed(1, 1),
        before(3),
        before(2),
        after(1),
        fixed(5, 1),
        fixed(5, 17),
        after(39),
        after(50),
        fixed(12, 25),
        fixed(12, 26),
    ]
}

/// Norwegian public holidays for `year`: the five fixed-date holidays plus
/// Maundy Thursday, Good Friday, Easter Monday, Ascension Day and Whit Monday.
pub fn norwegian_holidays(year: i32) -> Result<BTreeSet<NaiveDate>, CalendarError> {
    if !(MIN_HOLIDAY_YEAR..=MAX_HOLIDAY_YEAR).contains(&year) {
        return Err(CalendarError::YearOutOfRange(year));
    }
    Ok(builtin_holidays(year).into_iter().collect())
}

/// Built-in Norwegian holidays adjusted by user additions and removals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HolidayCalendar {
    extra_dates: BTreeSet<NaiveDate>,
    removed_dates: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    /// The plain Norwegian rule set without overrides.
    pub fn norwegian() -> Self {
        Self::default()
    }

    pub fn with_overrides(
        extra_dates: BTreeSet<NaiveDate>,
        removed_dates: BTreeSet<NaiveDate>,
    ) -> Result<Self, CalendarError> {
        if let Some(d) = extra_dates.intersection(&removed_dates).next() {
            return Err(CalendarError::ConflictingOverride(*d));
        }
        Ok(HolidayCalendar {
            extra_dates,
            removed_dates,
        })
    }

    /// Parses an override file: one ISO-8601 date per line, a leading `-`
    /// removes a built-in holiday. Blank lines and `#` comments are ignored.
    pub fn from_override_reader<R: BufRead>(reader: R) -> Result<Self, CalendarError> {
        let mut extra = BTreeSet::new();
        let mut removed = BTreeSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CalendarError::Io(e.to_string()))?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (target, date_text) = match text.strip_prefix('-') {
                Some(rest) => (&mut removed, rest.trim()),
                None => (&mut extra, text),
            };
            let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|_| {
                CalendarError::BadOverrideLine {
                    line: i + 1,
                    text: text.to_string(),
                }
            })?;
            target.insert(date);
        }
        Self::with_overrides(extra, removed)
    }

    pub fn extra_dates(&self) -> &BTreeSet<NaiveDate> {
        &self.extra_dates
    }

    pub fn removed_dates(&self) -> &BTreeSet<NaiveDate> {
        &self.removed_dates
    }

    pub fn is_holiday(&self, date: NaiveDate) -> bool {
        if self.extra_dates.contains(&date) {
            return true;
        }
        if self.removed_dates.contains(&date) {
            return false;
        }
        builtin_holidays(date.year()).contains(&date)
    }
}

/// Assigns a date to its loading context.
pub fn classify_day(
    date: NaiveDate,
    seasons: &SeasonConfig,
    holidays: &HolidayCalendar,
) -> DayContext {
    let weekend =
        matches!(date.weekday(), Weekday::Sat | Weekday::Sun) || holidays.is_holiday(date);
    let daytype = if weekend {
        DayType::Weekend
    } else {
        DayType::Weekday
    };
    DayContext::new(seasons.season_of_month(date.month()), daytype)
}
