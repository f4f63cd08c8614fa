pub const DAY_SECONDS: u32 = 86_400;

/// Daily collection window in seconds since local midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollectionWindow {
    pub start_s: u32,
    pub end_s: u32,
}

impl Default for CollectionWindow {
    /// 07:30 to 21:30.
    fn default() -> Self {
        Self {
            start_s: 7 * 3600 + 30 * 60,
            end_s: 21 * 3600 + 30 * 60,
        }
    }
}

impl CollectionWindow {
    pub fn validate(&self) -> Result<(), String> {
        if self.start_s >= self.end_s || self.end_s > DAY_SECONDS {
            return Err(format!(
                "collection window {}..{} must be increasing and within one day",
                self.start_s, self.end_s
            ));
        }
        Ok(())
    }

    /// Whether a second-of-day falls inside the window.
    pub fn contains_day_second(&self, day_second: f64) -> bool {
        day_second >= self.start_s as f64 && day_second < self.end_s as f64
    }

    /// Window length in seconds (50,400 for the default 14-hour window).
    pub fn len_seconds(&self) -> u32 {
        self.end_s - self.start_s
    }
}
