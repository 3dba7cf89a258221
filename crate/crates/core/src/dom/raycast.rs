//! Integer 3D line stepping between voxel indices.

use super::octree::VoxelIndex;

/// Voxels along the 3D Bresenham line from `a` to `b`, both endpoints
/// included, in traversal order.
pub fn line_voxels(a: VoxelIndex, b: VoxelIndex) -> Vec<VoxelIndex> {
    let mut out = Vec::new();
    let d = [
        (b[0] - a[0]).abs(),
        (b[1] - a[1]).abs(),
        (b[2] - a[2]).abs(),
    ];
    let s = [
        (b[0] - a[0]).signum(),
        (b[1] - a[1]).signum(),
        (b[2] - a[2]).signum(),
    ];
    // Driving axis = largest extent; the other two advance on error overflow.
    let axis = if d[0] >= d[1] && d[0] >= d[2] {
        0
    } else if d[1] >= d[0] && d[1] >= d[2] {
        1
    } else {
        2
    };
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut p = a;
    let mut err_u = 2 * d[u] - d[axis];
    let mut err_v = 2 * d[v] - d[axis];
    out.push(p);
    while p[axis] != b[axis] {
        if err_u >= 0 {
            p[u] += s[u];
            err_u -= 2 * d[axis];
        }
        if err_v >= 0 {
            p[v] += s[v];
            err_v -= 2 * d[axis];
        }
        err_u += 2 * d[u];
        err_v += 2 * d[v];
        p[axis] += s[axis];
        out.push(p);
    }
    out
}
