"""Numba kernels for the reference rasterizer.

Pipeline per triangle: flat shade on the geometric normal, transform to clip
space, Sutherland-Hodgman clip against all six frustum planes, perspective
divide, viewport transform into tile-local pixel coordinates, back-face cull,
top-left-rule rasterization with a strict less-than depth test.

All float math runs in tile-local coordinates; the tile placement is a pure
integer offset applied at the write address. That makes per-scene and tiled
renders bit-identical by construction.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _plane_dist(v, plane):
    # planes: 0,1 -> w±x ; 2,3 -> w±y ; 4,5 -> w±z
    axis = plane // 2
    if plane % 2 == 0:
        return v[3] + v[axis]
    return v[3] - v[axis]


@njit(cache=True)
def _draw_one(
    verts,
    tris,
    mvp,
    nmat,
    rgba,
    vw,
    vh,
    off_x,
    off_y,
    lambert,
    light,
    ambient,
    diffuse,
    cull,
    color,
    depth,
):
    poly = np.empty((16, 4))
    tmp = np.empty((16, 4))
    sx = np.empty(16)
    sy = np.empty(16)
    sz = np.empty(16)
    clip = np.empty((3, 4))

    for t in range(tris.shape[0]):
        i0, i1, i2 = tris[t, 0], tris[t, 1], tris[t, 2]
        v0, v1, v2 = verts[i0], verts[i1], verts[i2]

        # geometric face normal in object space
        e1x, e1y, e1z = v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2]
        e2x, e2y, e2z = v2[0] - v0[0], v2[1] - v0[1], v2[2] - v0[2]
        nx = e1y * e2z - e1z * e2y
        ny = e1z * e2x - e1x * e2z
        nz = e1x * e2y - e1y * e2x
        nlen = np.sqrt(nx * nx + ny * ny + nz * nz)
        if nlen == 0.0:
            continue
        nx, ny, nz = nx / nlen, ny / nlen, nz / nlen

        if lambert:
            wx = nmat[0, 0] * nx + nmat[0, 1] * ny + nmat[0, 2] * nz
            wy = nmat[1, 0] * nx + nmat[1, 1] * ny + nmat[1, 2] * nz
            wz = nmat[2, 0] * nx + nmat[2, 1] * ny + nmat[2, 2] * nz
            wlen = np.sqrt(wx * wx + wy * wy + wz * wz)
            if wlen > 0.0:
                wx, wy, wz = wx / wlen, wy / wlen, wz / wlen
            ndotl = wx * light[0] + wy * light[1] + wz * light[2]
            if ndotl < 0.0:
                ndotl = 0.0
            inten = ambient + diffuse * ndotl
        else:
            inten = 1.0
        cr = rgba[0] * inten
        cg = rgba[1] * inten
        cb = rgba[2] * inten
        if cr > 1.0:
            cr = 1.0
        if cg > 1.0:
            cg = 1.0
        if cb > 1.0:
            cb = 1.0
        byte_r = np.uint8(int(255.0 * cr + 0.5))
        byte_g = np.uint8(int(255.0 * cg + 0.5))
        byte_b = np.uint8(int(255.0 * cb + 0.5))
        byte_a = np.uint8(int(255.0 * rgba[3] + 0.5))

        # object space -> clip space
        for k in range(3):
            if k == 0:
                src = v0
            elif k == 1:
                src = v1
            else:
                src = v2
            for row in range(4):
                clip[k, row] = (
                    mvp[row, 0] * src[0]
                    + mvp[row, 1] * src[1]
                    + mvp[row, 2] * src[2]
                    + mvp[row, 3]
                )

        # Sutherland-Hodgman against all six frustum planes
        n_in = 3
        for k in range(3):
            for row in range(4):
                poly[k, row] = clip[k, row]
        for plane in range(6):
            n_out = 0
            for i in range(n_in):
                j = i + 1
                if j == n_in:
                    j = 0
                dc = _plane_dist(poly[i], plane)
                dn = _plane_dist(poly[j], plane)
                if dc >= 0.0:
                    for row in range(4):
                        tmp[n_out, row] = poly[i, row]
                    n_out += 1
                if (dc >= 0.0) != (dn >= 0.0):
                    frac = dc / (dc - dn)
                    for row in range(4):
                        tmp[n_out, row] = poly[i, row] + frac * (poly[j, row] - poly[i, row])
                    n_out += 1
            for i in range(n_out):
                for row in range(4):
                    poly[i, row] = tmp[i, row]
            n_in = n_out
            if n_in < 3:
                break
        if n_in < 3:
            continue

        # perspective divide and viewport transform (tile-local)
        valid = True
        for k in range(n_in):
            w = poly[k, 3]
            if w <= 0.0:
                valid = False
                break
            inv_w = 1.0 / w
            xn = poly[k, 0] * inv_w
            yn = poly[k, 1] * inv_w
            zn = poly[k, 2] * inv_w
            sx[k] = (xn + 1.0) * 0.5 * vw
            sy[k] = (1.0 - yn) * 0.5 * vh
            sz[k] = (zn + 1.0) * 0.5
        if not valid:
            continue

        # fan-triangulate the clipped polygon
        for k in range(1, n_in - 1):
            _raster_tri(
                sx[0], sy[0], sz[0],
                sx[k], sy[k], sz[k],
                sx[k + 1], sy[k + 1], sz[k + 1],
                vw, vh, off_x, off_y,
                byte_r, byte_g, byte_b, byte_a,
                cull, color, depth,
            )


@njit(cache=True)
def _raster_tri(
    x0, y0, z0, x1, y1, z1, x2, y2, z2,
    vw, vh, off_x, off_y,
    byte_r, byte_g, byte_b, byte_a,
    cull, color, depth,
):
    # Front faces are counter-clockwise on screen (y down), i.e. negative
    # math orientation. Reorder so orient2d(V0, V1, V2) > 0 before the
    # top-left coverage rule.
    area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    if area2 == 0.0:
        return
    if area2 > 0.0:
        if cull:
            return
        x1, y1, z1, x2, y2, z2 = x2, y2, z2, x1, y1, z1
    ax, ay, az = x0, y0, z0
    bx, by, bz = x2, y2, z2
    cx, cy, cz = x1, y1, z1
    area2p = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if area2p <= 0.0:
        return
    inv_area = 1.0 / area2p

    minx = min(ax, min(bx, cx))
    maxx = max(ax, max(bx, cx))
    miny = min(ay, min(by, cy))
    maxy = max(ay, max(by, cy))
    px_lo = int(np.ceil(minx - 0.5))
    px_hi = int(np.floor(maxx - 0.5))
    py_lo = int(np.ceil(miny - 0.5))
    py_hi = int(np.floor(maxy - 0.5))
    if px_lo < 0:
        px_lo = 0
    if py_lo < 0:
        py_lo = 0
    if px_hi > vw - 1:
        px_hi = vw - 1
    if py_hi > vh - 1:
        py_hi = vh - 1

    # top-left rule: include boundary pixels on horizontal edges going right
    # and on edges going up (y decreasing), for positive-orientation winding
    tl0 = (cy == by and cx > bx) or (cy < by)  # edge b -> c
    tl1 = (ay == cy and ax > cx) or (ay < cy)  # edge c -> a
    tl2 = (by == ay and bx > ax) or (by < ay)  # edge a -> b

    for py in range(py_lo, py_hi + 1):
        pyc = py + 0.5
        for px in range(px_lo, px_hi + 1):
            pxc = px + 0.5
            w0 = (cx - bx) * (pyc - by) - (cy - by) * (pxc - bx)
            w1 = (ax - cx) * (pyc - cy) - (ay - cy) * (pxc - cx)
            w2 = (bx - ax) * (pyc - ay) - (by - ay) * (pxc - ax)
            if (w0 > 0.0 or (w0 == 0.0 and tl0)) and (
                w1 > 0.0 or (w1 == 0.0 and tl1)
            ) and (w2 > 0.0 or (w2 == 0.0 and tl2)):
                z = (w0 * az + w1 * bz + w2 * cz) * inv_area
                ty = py + off_y
                tx = px + off_x
                if z < depth[ty, tx]:
                    depth[ty, tx] = z
                    color[ty, tx, 0] = byte_r
                    color[ty, tx, 1] = byte_g
                    color[ty, tx, 2] = byte_b
                    color[ty, tx, 3] = byte_a


@njit(cache=True)
def _draw_batch(
    verts,
    tris,
    mvps,
    nmats,
    rgbas,
    offs,
    vw,
    vh,
    lambert,
    light,
    ambient,
    diffuse,
    cull,
    color,
    depth,
):
    for k in range(mvps.shape[0]):
        _draw_one(
            verts,
            tris,
            mvps[k],
            nmats[k],
            rgbas[k],
            vw,
            vh,
            offs[k, 0],
            offs[k, 1],
            lambert,
            light,
            ambient,
            diffuse,
            cull,
            color,
            depth,
        )
