//! Allowed token sets of the plan template, and their mapping onto world
//! axes and sides.

use crate::geometry::{Axis, Face, Side};

/// Principal-axis tokens accepted for cylinder orientation.
pub const CYLINDER_AXIS_TOKENS: [(&str, Axis); 3] = [
    ("FRONT_BACK", Axis::X),
    ("LEFT_RIGHT", Axis::Y),
    ("TOP_BOTTOM", Axis::Z),
];

pub const CONTACT_TOKENS: [&str; 2] = ["SURFACE", "INSERTED"];
pub const JOINT_TOKENS: [&str; 2] = ["FIXED", "NON_FIXED"];
pub const MODIFICATION_TYPES: [&str; 1] = ["HOLE"];

pub const FACE_TOKENS: [(&str, Face); 6] = [
    ("TOP", Face { axis: Axis::Z, side: Side::Pos }),
    ("BOTTOM", Face { axis: Axis::Z, side: Side::Neg }),
    ("RIGHT", Face { axis: Axis::Y, side: Side::Neg }),
    ("LEFT", Face { axis: Axis::Y, side: Side::Pos }),
    ("FRONT", Face { axis: Axis::X, side: Side::Pos }),
    ("BACK", Face { axis: Axis::X, side: Side::Neg }),
];

/// Alignment of one part relative to another along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Align {
    Center,
    Flush(Side),
}

/// Extent of a hole along its own axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HoleSpan {
    Full,
    /// Half the owner's extent, starting at the face on `Side`.
    HalfFrom(Side),
}

/// One `ALIGN_*` entry of a modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModAlign {
    At(Align),
    Through(HoleSpan),
}

/// (negative-side token, positive-side token) for connection alignment.
fn connection_side_names(axis: Axis) -> (&'static str, &'static str) {
    match axis {
        Axis::X => ("BACK", "FRONT"),
        Axis::Y => ("RIGHT", "LEFT"),
        Axis::Z => ("BOTTOM", "TOP"),
    }
}

fn modification_side_names(axis: Axis) -> (&'static str, &'static str) {
    match axis {
        Axis::X => ("BACK", "FRONT"),
        Axis::Y => ("RIGHT", "LEFT"),
        Axis::Z => ("LOW", "HIGH"),
    }
}

/// Through tokens per axis: (full, half-from-negative, half-from-positive).
fn through_names(axis: Axis) -> (&'static str, &'static str, &'static str) {
    match axis {
        Axis::X => ("FRONT_BACK_FULL", "BACK_FRONT_HALF", "FRONT_BACK_HALF"),
        Axis::Y => ("RIGHT_LEFT_FULL", "RIGHT_LEFT_HALF", "LEFT_RIGHT_HALF"),
        Axis::Z => ("HIGH_LOW_FULL", "LOW_HIGH_HALF", "HIGH_LOW_HALF"),
    }
}

fn align_token(names: (&'static str, &'static str), align: Align) -> &'static str {
    match align {
        Align::Center => "CENTER",
        Align::Flush(Side::Neg) => names.0,
        Align::Flush(Side::Pos) => names.1,
    }
}

fn parse_align(names: (&str, &str), token: &str) -> Option<Align> {
    match token {
        "CENTER" => Some(Align::Center),
        t if t == names.0 => Some(Align::Flush(Side::Neg)),
        t if t == names.1 => Some(Align::Flush(Side::Pos)),
        _ => None,
    }
}

pub fn connection_align_token(axis: Axis, align: Align) -> &'static str {
    align_token(connection_side_names(axis), align)
}

pub fn parse_connection_align(axis: Axis, token: &str) -> Option<Align> {
    parse_align(connection_side_names(axis), token)
}

pub fn connection_align_tokens(axis: Axis) -> [&'static str; 3] {
    let (neg, pos) = connection_side_names(axis);
    [pos, "CENTER", neg]
}

pub fn modification_align_token(axis: Axis, align: ModAlign) -> &'static str {
    match align {
        ModAlign::At(a) => align_token(modification_side_names(axis), a),
        ModAlign::Through(span) => {
            let (full, from_neg, from_pos) = through_names(axis);
            match span {
                HoleSpan::Full => full,
                HoleSpan::HalfFrom(Side::Neg) => from_neg,
                HoleSpan::HalfFrom(Side::Pos) => from_pos,
            }
        }
    }
}

pub fn parse_modification_align(axis: Axis, token: &str) -> Option<ModAlign> {
    if let Some(a) = parse_align(modification_side_names(axis), token) {
        return Some(ModAlign::At(a));
    }
    let (full, from_neg, from_pos) = through_names(axis);
    match token {
        t if t == full => Some(ModAlign::Through(HoleSpan::Full)),
        t if t == from_neg => Some(ModAlign::Through(HoleSpan::HalfFrom(Side::Neg))),
        t if t == from_pos => Some(ModAlign::Through(HoleSpan::HalfFrom(Side::Pos))),
        _ => None,
    }
}

/// Every token accepted for a modification `ALIGN_*` on `axis`.
pub fn modification_align_tokens(axis: Axis) -> [&'static str; 6] {
    let (neg, pos) = modification_side_names(axis);
    let (full, from_neg, from_pos) = through_names(axis);
    [pos, "CENTER", neg, full, from_pos, from_neg]
}

pub fn face_token(face: Face) -> &'static str {
    FACE_TOKENS
        .iter()
        .find(|(_, f)| *f == face)
        .map(|(t, _)| *t)
        .expect("all six faces have a token")
}

pub fn parse_face(token: &str) -> Option<Face> {
    FACE_TOKENS.iter().find(|(t, _)| *t == token).map(|(_, f)| *f)
}

pub fn cylinder_axis_token(axis: Axis) -> &'static str {
    CYLINDER_AXIS_TOKENS[axis.index()].0
}

pub fn parse_cylinder_axis(token: &str) -> Option<Axis> {
    CYLINDER_AXIS_TOKENS
        .iter()
        .find(|(t, _)| *t == token)
        .map(|(_, a)| *a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modification_tokens_round_trip() {
        for axis in Axis::ALL {
            for token in modification_align_tokens(axis) {
                let parsed = parse_modification_align(axis, token).unwrap();
                assert_eq!(modification_align_token(axis, parsed), token);
            }
        }
    }

    #[test]
    fn connection_tokens_round_trip() {
        for axis in Axis::ALL {
            for token in connection_align_tokens(axis) {
                let parsed = parse_connection_align(axis, token).unwrap();
                assert_eq!(connection_align_token(axis, parsed), token);
            }
        }
        assert_eq!(parse_connection_align(Axis::Z, "HIGH"), None);
        assert_eq!(parse_modification_align(Axis::Z, "TOP"), None);
    }

    #[test]
    fn half_tokens_start_at_first_named_face() {
        assert_eq!(
            parse_modification_align(Axis::X, "FRONT_BACK_HALF"),
            Some(ModAlign::Through(HoleSpan::HalfFrom(Side::Pos)))
        );
        assert_eq!(
            parse_modification_align(Axis::Y, "RIGHT_LEFT_HALF"),
            Some(ModAlign::Through(HoleSpan::HalfFrom(Side::Neg)))
        );
        assert_eq!(
            parse_modification_align(Axis::Z, "LOW_HIGH_HALF"),
            Some(ModAlign::Through(HoleSpan::HalfFrom(Side::Neg)))
        );
    }
}
