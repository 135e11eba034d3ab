//! On-disk dataset layout and the packed particle-trajectory codec.
//!
//! ```text
//! <root>/<family>/<split>/<episode_id>/
//!   episode.json        scene, end effector, trajectory, labels, events
//!   particles.bin       every raw keyframe, packed float32
//!   frame_NNN/          one per retained keyframe, named by raw index
//!     comp_K.obj        surface mesh of component K
//!     ee.obj            both fingers, posed
//!     ee_pose.json      grip pose and width
//!     topo.json         topology label and events snapped to this frame
//! ```

use super::{component_meshes, Episode, GenConfig, ScenegenError, Split};
use crate::math::{Real, Vec3};
use crate::meshing::{write_obj, SurfaceMesh};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const PARTICLES_MAGIC: [u8; 4] = *b"CLAY";
pub const PARTICLES_VERSION: u32 = 1;
/// Header: magic, version, particle count, frame count.
const HEADER_LEN: usize = 16;
/// Per particle and frame: position, velocity, label.
const RECORD_FLOATS: usize = 7;

/// Decoded particles.bin payload: `frames[f][p] = [x, y, z, vx, vy, vz, label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlesBin {
    pub frames: Vec<Vec<[f32; RECORD_FLOATS]>>,
}

/// Packs every raw keyframe of `episode` into the float32 codec.
pub fn write_particles_bin(path: &Path, episode: &Episode) -> Result<(), ScenegenError> {
    let n = episode.keyframes.first().map_or(0, |f| f.positions.len());
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&PARTICLES_MAGIC)?;
    w.write_all(&PARTICLES_VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(episode.keyframes.len() as u32).to_le_bytes())?;
    for frame in &episode.keyframes {
        for ((p, v), &l) in frame.positions.iter().zip(&frame.velocities).zip(&frame.labels) {
            for c in [p.x, p.y, p.z, v.x, v.y, v.z, l as Real] {
                w.write_all(&(c as f32).to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_particles_bin(path: &Path) -> Result<ParticlesBin, ScenegenError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| ScenegenError::BadParticlesBin("truncated header".into()))?;
    if header[..4] != PARTICLES_MAGIC {
        return Err(ScenegenError::BadParticlesBin("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version > PARTICLES_VERSION {
        return Err(ScenegenError::BadParticlesBin(format!(
            "version {version} is newer than supported {PARTICLES_VERSION}"
        )));
    }
    let (n, frames) = (word(8) as usize, word(12) as usize);
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let expected = frames * n * RECORD_FLOATS * 4;
    if body.len() != expected {
        return Err(ScenegenError::BadParticlesBin(format!(
            "payload is {} bytes, header implies {expected}",
            body.len()
        )));
    }
    let mut out = ParticlesBin { frames: Vec::with_capacity(frames) };
    let mut at = 0;
    for _ in 0..frames {
        let mut frame = Vec::with_capacity(n);
        for _ in 0..n {
            let mut rec = [0f32; RECORD_FLOATS];
            for slot in &mut rec {
                *slot = f32::from_le_bytes(body[at..at + 4].try_into().unwrap());
                at += 4;
            }
            frame.push(rec);
        }
        out.frames.push(frame);
    }
    Ok(out)
}

/// Both finger boxes at the recorded pose, merged into one mesh.
fn ee_mesh(episode: &Episode, width: Real) -> SurfaceMesh {
    let local = episode.ee.finger_mesh();
    let traj = &episode.traj;
    let (s, c) = traj.theta_z.sin_cos();
    let mut vertices = Vec::with_capacity(local.vertices.len() * 2);
    let mut faces = Vec::with_capacity(local.faces.len() * 2);
    for side in [1.0, -1.0] {
        let offset = width / 2.0 + episode.ee.finger_thickness / 2.0;
        let center = Vec3::new(traj.t_x, traj.t_y, traj.center_z)
            + traj.closing_axis() * (side * offset);
        let base = vertices.len() as u32;
        for v in &local.vertices {
            vertices.push(center + Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z));
        }
        faces.extend(local.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
    }
    SurfaceMesh::new(vertices, faces)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), ScenegenError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes one episode. `raw` supplies every keyframe for particles.bin;
/// `sub` supplies the retained keyframes that get frame directories.
/// Returns the episode directory.
pub fn write_episode(
    root: &Path,
    episode_id: &str,
    split: Split,
    raw: &Episode,
    sub: &Episode,
    cfg: &GenConfig,
) -> Result<PathBuf, ScenegenError> {
    let dir = root.join(raw.scene.family()).join(split.dir_name()).join(episode_id);
    fs::create_dir_all(&dir)?;

    write_particles_bin(&dir.join("particles.bin"), raw)?;

    for frame in &sub.keyframes {
        let fdir = dir.join(format!("frame_{:03}", frame.index));
        fs::create_dir_all(&fdir)?;
        for (comp, mesh) in component_meshes(&frame.positions, &frame.labels, cfg) {
            write_obj(&mesh, &fdir.join(format!("comp_{comp}.obj")))?;
        }
        write_obj(&ee_mesh(raw, frame.ee.width), &fdir.join("ee.obj"))?;
        write_json(&fdir.join("ee_pose.json"), &serde_json::to_value(frame.ee)?)?;
        let events: Vec<_> = sub.events.iter().filter(|e| e.keyframe == frame.index).collect();
        write_json(
            &fdir.join("topo.json"),
            &serde_json::json!({
                "label": { "c": frame.label.c, "genera": frame.label.genera },
                "events": events,
            }),
        )?;
    }

    let labels: Vec<_> = raw
        .keyframes
        .iter()
        .map(|f| {
            serde_json::json!({
                "keyframe": f.index,
                "time": f.time,
                "c": f.label.c,
                "genera": f.label.genera,
            })
        })
        .collect();
    write_json(
        &dir.join("episode.json"),
        &serde_json::json!({
            "format_version": PARTICLES_VERSION,
            "episode_id": episode_id,
            "split": split,
            "scene": raw.scene,
            "end_effector": raw.ee,
            "trajectory": raw.traj,
            "seed": raw.seed,
            "config": cfg,
            "raw_keyframes": raw.keyframes.len(),
            "retained": sub.keyframes.iter().map(|f| f.index).collect::<Vec<_>>(),
            "labels": labels,
            "events": raw.events,
        }),
    )?;
    Ok(dir)
}
