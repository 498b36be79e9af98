//! Plain-text sweep format.
//!
//! ```text
//! # sweep frame=1 x=0 y=0 theta=0 n_rays=720
//! angle,range,tag
//! 0,12.5,bg
//! 0.008726646259971648,inf,none
//! 0.017453292519943295,9.75,3
//! ```
//!
//! One row per ray in ray order. `angle` is sensor-relative in radians,
//! `range` is meters or `inf` for no return, and `tag` is `bg`, `none`, or
//! an actor id.

use super::{ray_angle, RangeImage, Sweep, SweepPoint, Tag};
use crate::error::{Error, Result};
use crate::scenario::geometry::{Pose, Vec2};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct Row {
    angle: f64,
    range: f64,
    tag: String,
}

fn tag_str(tag: Tag) -> String {
    match tag {
        Tag::NoReturn => "none".into(),
        Tag::Background => "bg".into(),
        Tag::Actor(id) => id.to_string(),
    }
}

fn parse_tag(s: &str) -> Result<Tag> {
    match s {
        "none" => Ok(Tag::NoReturn),
        "bg" => Ok(Tag::Background),
        _ => s
            .parse()
            .map(Tag::Actor)
            .map_err(|_| Error::Parse { field: "tag".into(), message: format!("unknown tag {s:?}") }),
    }
}

pub fn write_sweep(w: &mut impl Write, sweep: &Sweep) -> Result<()> {
    let p = sweep.pose;
    let io = |e| Error::io("<sweep>", e);
    writeln!(w, "# sweep frame={} x={} y={} theta={} n_rays={}", sweep.frame, p.x, p.y, p.theta, sweep.n_rays)
        .map_err(io)?;
    let img: RangeImage = sweep.to_range_image();
    let mut csv = csv::Writer::from_writer(w);
    for i in 0..img.n_rays() {
        csv.serialize(Row {
            angle: ray_angle(i, img.n_rays()),
            range: img.ranges[i],
            tag: tag_str(img.tags[i]),
        })
        .map_err(|e| Error::Parse { field: "row".into(), message: e.to_string() })?;
    }
    csv.flush().map_err(io)
}

pub fn sweep_to_string(sweep: &Sweep) -> String {
    let mut buf = Vec::new();
    write_sweep(&mut buf, sweep).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn header_field<T: std::str::FromStr>(header: &str, key: &str) -> Result<T> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse { field: key.into(), message: "missing or malformed header field".into() })
}

pub fn read_sweep(mut r: impl Read) -> Result<Sweep> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::io("<sweep>", e))?;
    parse_sweep(&text)
}

pub fn parse_sweep(text: &str) -> Result<Sweep> {
    let header = text
        .lines()
        .next()
        .filter(|l| l.starts_with("# sweep"))
        .ok_or_else(|| Error::Parse { field: "header".into(), message: "expected '# sweep ...' line".into() })?;
    let frame = header_field(header, "frame")?;
    let pose = Pose::new(header_field(header, "x")?, header_field(header, "y")?, header_field(header, "theta")?);
    let n_rays: usize = header_field(header, "n_rays")?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut points = Vec::new();
    let mut rows = 0;
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Parse { field: format!("row {}", i + 1), message: e.to_string() })?;
        rows += 1;
        if row.range.is_finite() {
            let d = Vec2::from_angle(row.angle) * row.range;
            points.push(SweepPoint { x: d.x, y: d.y, tag: parse_tag(&row.tag)? });
        }
    }
    if rows != n_rays {
        return Err(Error::Parse { field: "n_rays".into(), message: format!("header says {n_rays}, found {rows} rows") });
    }
    Ok(Sweep { pose, frame, n_rays, points })
}

pub fn save_sweep(path: &Path, sweep: &Sweep) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    write_sweep(&mut f, sweep)
}

pub fn load_sweep(path: &Path) -> Result<Sweep> {
    read_sweep(std::fs::File::open(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensorsim::{render_frame, LidarConfig};
    use crate::toy;

    #[test]
    fn round_trip_preserves_points() {
        let sc = toy::occluding_bus();
        let s = Sweep::from_range_image(&render_frame(&sc, 1, &LidarConfig::default()), 1);
        let text = sweep_to_string(&s);
        assert!(text.starts_with("# sweep frame=1"));
        let back = parse_sweep(&text).unwrap();
        assert_eq!((back.pose, back.frame, back.n_rays), (s.pose, s.frame, s.n_rays));
        assert_eq!(back.points.len(), s.points.len());
        for (a, b) in back.points.iter().zip(&s.points) {
            assert_eq!(a.tag, b.tag);
            assert!(a.position().distance(b.position()) < 1e-12);
        }
    }

    #[test]
    fn rejects_truncated_file() {
        let sc = toy::single_actor_straight();
        let s = Sweep::from_range_image(&render_frame(&sc, 0, &LidarConfig::default()), 0);
        let text = sweep_to_string(&s);
        let cut: String = text.lines().take(100).map(|l| format!("{l}\n")).collect();
        assert!(parse_sweep(&cut).is_err());
        assert!(parse_sweep("angle,range,tag\n").is_err());
    }
}
