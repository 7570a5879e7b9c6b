use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which hands touch the object in a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactLabel {
    Left,
    Right,
    Both,
    None,
}

impl fmt::Display for ContactLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContactLabel::Left => "left",
            ContactLabel::Right => "right",
            ContactLabel::Both => "both",
            ContactLabel::None => "none",
        })
    }
}

impl FromStr for ContactLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(ContactLabel::Left),
            "right" => Ok(ContactLabel::Right),
            "both" => Ok(ContactLabel::Both),
            "none" => Ok(ContactLabel::None),
            other => Err(format!("unknown contact label `{other}`")),
        }
    }
}

/// A run of consecutive frames held by a single hand: `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackSegment {
    pub hand: ContactLabel,
    pub start: usize,
    pub end: usize,
}

impl TrackSegment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Splits a track into single-hand runs, breaking at every change of the
/// contacting hand and at frames with zero or two hands in contact. Runs
/// shorter than two frames are dropped.
pub fn curate_tracks(labels: &[ContactLabel]) -> Vec<TrackSegment> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < labels.len() {
        let hand = labels[start];
        let mut end = start + 1;
        while end < labels.len() && labels[end] == hand {
            end += 1;
        }
        if matches!(hand, ContactLabel::Left | ContactLabel::Right) && end - start >= 2 {
            out.push(TrackSegment { hand, start, end });
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ContactLabel::*;

    #[test]
    fn single_hand_track_kept_whole() {
        assert_eq!(curate_tracks(&[Right, Right, Right]), vec![TrackSegment { hand: Right, start: 0, end: 3 }]);
    }

    #[test]
    fn hand_change_splits_track() {
        assert_eq!(
            curate_tracks(&[Right, Right, Left, Left]),
            vec![TrackSegment { hand: Right, start: 0, end: 2 }, TrackSegment { hand: Left, start: 2, end: 4 }]
        );
    }

    #[test]
    fn both_hands_frame_breaks_and_short_runs_drop() {
        assert!(curate_tracks(&[Right, Both, Right]).is_empty());
        assert!(curate_tracks(&[None, None]).is_empty());
        assert!(curate_tracks(&[]).is_empty());
    }

    #[test]
    fn labels_round_trip_text() {
        for l in [Left, Right, Both, None] {
            assert_eq!(l.to_string().parse::<ContactLabel>().unwrap(), l);
        }
        assert!("elbow".parse::<ContactLabel>().is_err());
    }
}
