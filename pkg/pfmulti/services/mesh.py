"""
Mesh service: shape functions, quadrature, isoparametric mapping, structured
generators and the ASCII mesh reader/writer.

The file format is the text v2.2 layout of the Gmsh mesh format
(``$Nodes``/``$Elements`` blocks) with one extension block for named sets::

    $Sets
    <number of sets>
    node|element <name> <count> <id> <id> ...
    $EndSets

Set ids refer to the file's node or element ids. Element type codes:
2 = tri3, 3 = quad4, 16 = quad8, 5 = hex8; points (15) and lines (1, 8)
and, for 3D meshes, faces (2, 3) become node sets ``physical_<tag>``.
Node ordering is counter-clockwise for 2D elements; quad8 lists the four
corners then the midside nodes of edges 0-1, 1-2, 2-3, 3-0.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pfmulti.core.errors import (DanglingNodeError, InvertedElementError, MeshError,
                                 MeshParseError)
from pfmulti.models.mesh import ElementGeometry, ElementKind, Mesh, QuadratureRule

logger = logging.getLogger(__name__)

_QUAD_CORNERS = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_QUAD8_NODES = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1],
                         [0, -1], [1, 0], [0, 1], [-1, 0]], dtype=float)
_HEX_CORNERS = np.array([[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
                         [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]], dtype=float)

_GMSH_TYPES = {2: ElementKind.TRI3, 3: ElementKind.QUAD4, 16: ElementKind.QUAD8,
               5: ElementKind.HEX8}
_GMSH_LOWER = {15: 1, 1: 2, 8: 3}  # point, line2, line3

# local facets (edges in 2D, faces in 3D)
_FACETS = {
    ElementKind.TRI3: [(0, 1), (1, 2), (2, 0)],
    ElementKind.QUAD4: [(0, 1), (1, 2), (2, 3), (3, 0)],
    ElementKind.QUAD8: [(0, 1, 4), (1, 2, 5), (2, 3, 6), (3, 0, 7)],
    ElementKind.HEX8: [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
                       (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)],
}


def _as_kind(kind: Union[str, ElementKind]) -> ElementKind:
    try:
        return ElementKind(kind)
    except ValueError:
        raise MeshError(f"unsupported element kind '{kind}'")


def shape_functions(kind: Union[str, ElementKind], xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched shape functions: xi (n, dim) -> N (n, n_en), dN_dxi (n, n_en, dim)"""
    kind = _as_kind(kind)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if kind is ElementKind.TRI3:
        s, t = xi[:, 0], xi[:, 1]
        N = np.stack([1.0 - s - t, s, t], axis=1)
        dN = np.broadcast_to(np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]),
                             (xi.shape[0], 3, 2)).copy()
        return N, dN
    if kind is ElementKind.QUAD4:
        s, t = xi[:, 0:1], xi[:, 1:2]
        sa, ta = _QUAD_CORNERS[:, 0], _QUAD_CORNERS[:, 1]
        N = 0.25 * (1 + sa * s) * (1 + ta * t)
        dN = np.stack([0.25 * sa * (1 + ta * t), 0.25 * ta * (1 + sa * s)], axis=2)
        return N, dN
    if kind is ElementKind.QUAD8:
        s, t = xi[:, 0:1], xi[:, 1:2]
        sa, ta = _QUAD8_NODES[:4, 0], _QUAD8_NODES[:4, 1]
        Nc = 0.25 * (1 + sa * s) * (1 + ta * t) * (sa * s + ta * t - 1)
        dNc_s = 0.25 * sa * (1 + ta * t) * (2 * sa * s + ta * t)
        dNc_t = 0.25 * ta * (1 + sa * s) * (sa * s + 2 * ta * t)
        s, t = s[:, 0], t[:, 0]
        # midside nodes 4 and 6 sit on eta = -1/+1, nodes 5 and 7 on xi = +1/-1
        Nm = np.stack([0.5 * (1 - s * s) * (1 - t), 0.5 * (1 + s) * (1 - t * t),
                       0.5 * (1 - s * s) * (1 + t), 0.5 * (1 - s) * (1 - t * t)], axis=1)
        dNm_s = np.stack([-s * (1 - t), 0.5 * (1 - t * t), -s * (1 + t), -0.5 * (1 - t * t)], axis=1)
        dNm_t = np.stack([-0.5 * (1 - s * s), -t * (1 + s), 0.5 * (1 - s * s), -t * (1 - s)], axis=1)
        N = np.concatenate([Nc, Nm], axis=1)
        dN = np.stack([np.concatenate([dNc_s, dNm_s], axis=1),
                       np.concatenate([dNc_t, dNm_t], axis=1)], axis=2)
        return N, dN
    s, t, u = xi[:, 0:1], xi[:, 1:2], xi[:, 2:3]
    sa, ta, ua = _HEX_CORNERS[:, 0], _HEX_CORNERS[:, 1], _HEX_CORNERS[:, 2]
    N = 0.125 * (1 + sa * s) * (1 + ta * t) * (1 + ua * u)
    dN = np.stack([0.125 * sa * (1 + ta * t) * (1 + ua * u),
                   0.125 * ta * (1 + sa * s) * (1 + ua * u),
                   0.125 * ua * (1 + sa * s) * (1 + ta * t)], axis=2)
    return N, dN


def shape_eval(kind: Union[str, ElementKind], xi) -> Tuple[np.ndarray, np.ndarray]:
    """Shape function values (n_en,) and local derivatives (n_en, dim) at one point"""
    N, dN = shape_functions(kind, np.asarray(xi, dtype=float)[None, :])
    return N[0], dN[0]


def quadrature(kind: Union[str, ElementKind], reduced: bool = False) -> QuadratureRule:
    """Gauss rules: full integration by default, one order lower when reduced"""
    kind = _as_kind(kind)
    if kind is ElementKind.TRI3:
        return QuadratureRule(points=np.array([[1.0 / 3.0, 1.0 / 3.0]]), weights=np.array([0.5]))
    order = {ElementKind.QUAD4: 2, ElementKind.QUAD8: 3, ElementKind.HEX8: 2}[kind]
    if reduced:
        order -= 1
    x, w = np.polynomial.legendre.leggauss(order)
    grids = np.meshgrid(*([x] * kind.dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * kind.dim), indexing="ij")
    # first local coordinate runs fastest
    points = np.stack([g.transpose().ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.transpose().ravel() for g in wgrids], axis=1), axis=1)
    return QuadratureRule(points=points, weights=weights)


def map_gradients(element: int, node_coords: np.ndarray,
                  dN_dxi: np.ndarray) -> Tuple[float, np.ndarray]:
    """Jacobian determinant and physical gradients dN_dx = dN_dxi . J^-1"""
    J = np.asarray(node_coords).T @ np.asarray(dN_dxi)
    det_j = float(np.linalg.det(J))
    if not det_j > 0:
        raise InvertedElementError(element, det_j)
    return det_j, dN_dxi @ np.linalg.inv(J)


def element_geometry(mesh: Mesh, reduced: Optional[bool] = None) -> ElementGeometry:
    """Evaluate (and cache on the mesh) shape data at every quadrature point"""
    if reduced is None:
        reduced = mesh.reduced_integration
    cached = mesh._geometry.get(reduced)
    if cached is not None:
        return cached
    rule = quadrature(mesh.kind, reduced)
    N, dN_dxi = shape_functions(mesh.kind, rule.points)
    X = mesh.coords[mesh.connectivity]
    J = np.einsum("eai,paj->epij", X, dN_dxi)
    det_j = np.linalg.det(J)
    bad = det_j <= 0
    if np.any(bad):
        e, p = np.argwhere(bad)[0]
        raise InvertedElementError(int(e), float(det_j[e, p]))
    J_inv = np.linalg.inv(J)
    geometry = ElementGeometry(
        rule=rule,
        N=N,
        dN_dxi=dN_dxi,
        dN_dx=np.einsum("paj,epji->epai", dN_dxi, J_inv),
        det_j=det_j,
        dV=det_j * rule.weights[None, :],
        x_ip=np.einsum("pa,eai->epi", N, X),
    )
    mesh._geometry[reduced] = geometry
    return geometry


def _boundary_sets(coords: np.ndarray) -> Dict[str, np.ndarray]:
    names = [("left", "right"), ("bottom", "top"), ("back", "front")]
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    tol = 1e-12 * max(float(np.max(hi - lo)), 1.0)
    sets = {}
    for axis in range(coords.shape[1]):
        low_name, high_name = names[axis]
        sets[low_name] = np.flatnonzero(np.abs(coords[:, axis] - lo[axis]) <= tol)
        sets[high_name] = np.flatnonzero(np.abs(coords[:, axis] - hi[axis]) <= tol)
    return sets


def generate_tensor(axes: Sequence[Sequence[float]], kind: Union[str, ElementKind] = "quad4",
                    reduced_integration: bool = False) -> Mesh:
    """
    Conforming tensor-product mesh through the given per-axis node coordinates.
    Boundary node sets left/right, bottom/top and back/front are named
    automatically.
    """
    kind = _as_kind(kind)
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) != kind.dim:
        raise MeshError(f"{kind.value} needs {kind.dim} axes, got {len(axes)}")
    for a in axes:
        if a.size < 2 or np.any(np.diff(a) <= 0):
            raise MeshError("axis coordinates must be strictly increasing with at least one division")

    if kind.dim == 2:
        xs, ys = axes
        nx, ny = xs.size - 1, ys.size - 1
        X, Y = np.meshgrid(xs, ys)
        coords = np.stack([X.ravel(), Y.ravel()], axis=1)
        i, j = np.meshgrid(np.arange(nx), np.arange(ny))
        i, j = i.ravel(), j.ravel()
        n0 = j * (nx + 1) + i
        corners = np.stack([n0, n0 + 1, n0 + 1 + (nx + 1), n0 + (nx + 1)], axis=1)
        if kind is ElementKind.QUAD4:
            conn = corners
        elif kind is ElementKind.TRI3:
            conn = np.concatenate([corners[:, [0, 1, 2]], corners[:, [0, 2, 3]]], axis=0)
            order = np.arange(conn.shape[0]).reshape(2, -1).T.ravel()
            conn = conn[order]
        else:
            n_corner = coords.shape[0]
            # horizontal edge midpoints (nx per row, ny+1 rows), then vertical ones
            hx, hy = np.meshgrid(0.5 * (xs[:-1] + xs[1:]), ys)
            vx, vy = np.meshgrid(xs, 0.5 * (ys[:-1] + ys[1:]))
            n_h = hx.size
            coords = np.concatenate([coords,
                                     np.stack([hx.ravel(), hy.ravel()], axis=1),
                                     np.stack([vx.ravel(), vy.ravel()], axis=1)])
            bottom = n_corner + j * nx + i
            top = n_corner + (j + 1) * nx + i
            left = n_corner + n_h + j * (nx + 1) + i
            right = left + 1
            conn = np.concatenate([corners, np.stack([bottom, right, top, left], axis=1)], axis=1)
    else:
        if kind is not ElementKind.HEX8:
            raise MeshError(f"unsupported element kind '{kind.value}' in 3D")
        xs, ys, zs = axes
        nx, ny, nz = xs.size - 1, ys.size - 1, zs.size - 1
        Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
        coords = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        i, j, k = i.ravel(), j.ravel(), k.ravel()
        layer = (nx + 1) * (ny + 1)
        n0 = k * layer + j * (nx + 1) + i
        bottom = np.stack([n0, n0 + 1, n0 + 1 + (nx + 1), n0 + (nx + 1)], axis=1)
        conn = np.concatenate([bottom, bottom + layer], axis=1)

    mesh = Mesh(coords=coords, connectivity=conn, kind=kind,
                node_sets=_boundary_sets(coords), reduced_integration=reduced_integration)
    element_geometry(mesh)
    logger.debug("generated %r", mesh)
    return mesh


def generate_structured(bounds: Sequence[Sequence[float]], divisions: Sequence[int],
                        kind: Union[str, ElementKind] = "quad4",
                        reduced_integration: bool = False) -> Mesh:
    """Uniform structured mesh of a box given as per-axis (low, high) bounds"""
    kind = _as_kind(kind)
    if len(bounds) != len(divisions):
        raise MeshError("bounds and divisions disagree in dimension")
    if len(bounds) != kind.dim:
        raise MeshError(f"{kind.value} is not available in {len(bounds)}D")
    axes = []
    for (lo, hi), n in zip(bounds, divisions):
        if int(n) < 1:
            raise MeshError("divisions must be at least 1 per axis")
        if not hi > lo:
            raise MeshError(f"degenerate bounds ({lo}, {hi})")
        axes.append(np.linspace(lo, hi, int(n) + 1))
    return generate_tensor(axes, kind, reduced_integration)


def graded_axis(breakpoints: Sequence[float], divisions: Sequence[int],
                ratios: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    Node coordinates along one axis: segment k between breakpoints k and k+1
    gets divisions[k] cells whose sizes grow geometrically by ratios[k].
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.size != len(divisions) + 1:
        raise MeshError("need one more breakpoint than segments")
    ratios = [1.0] * len(divisions) if ratios is None else list(ratios)
    pieces = [breakpoints[:1]]
    for k, n in enumerate(divisions):
        a, b, q = breakpoints[k], breakpoints[k + 1], float(ratios[k])
        if int(n) < 1 or not b > a:
            raise MeshError("graded segments need positive length and divisions")
        sizes = q ** np.arange(int(n))
        edges = np.concatenate([[0.0], np.cumsum(sizes)]) / sizes.sum()
        pieces.append(a + (b - a) * edges[1:])
    return np.concatenate(pieces)


def facet_weights(mesh: Mesh, nodes) -> np.ndarray:
    """
    Consistent boundary weights w_a = integral of N_a over the facets whose
    nodes all belong to ``nodes``. Shared facets are counted once.
    """
    in_set = np.zeros(mesh.n_nodes, dtype=bool)
    in_set[np.asarray(nodes, dtype=np.int64)] = True
    facets = []
    for local in _FACETS[mesh.kind]:
        candidates = mesh.connectivity[:, list(local)]
        facets.append(candidates[np.all(in_set[candidates], axis=1)])
    facets = np.concatenate(facets, axis=0)
    weights = np.zeros(mesh.n_nodes)
    if facets.size == 0:
        return weights
    _, keep = np.unique(np.sort(facets, axis=1), axis=0, return_index=True)
    facets = facets[np.sort(keep)]
    X = mesh.coords[facets]
    n_f = facets.shape[1]
    if mesh.kind is ElementKind.HEX8:
        rule = quadrature(ElementKind.QUAD4)
        N, dN = shape_functions(ElementKind.QUAD4, rule.points)
        tangents = np.einsum("fai,pak->fpki", X, dN)
        jac = np.linalg.norm(np.cross(tangents[:, :, 0], tangents[:, :, 1]), axis=-1)
    else:
        s, w = np.polynomial.legendre.leggauss(3 if n_f == 3 else 2)
        if n_f == 3:
            N = np.stack([0.5 * s * (s - 1), 0.5 * s * (s + 1), 1 - s * s], axis=1)
            dN = np.stack([s - 0.5, s + 0.5, -2 * s], axis=1)
        else:
            N = np.stack([0.5 * (1 - s), 0.5 * (1 + s)], axis=1)
            dN = np.tile([-0.5, 0.5], (s.size, 1))
        rule = QuadratureRule(points=s[:, None], weights=w)
        jac = np.linalg.norm(np.einsum("fai,pa->fpi", X, dN), axis=-1)
    contrib = np.einsum("pa,fp,p->fa", N, jac, rule.weights)
    np.add.at(weights, facets.ravel(), contrib.ravel())
    return weights


def _tokens(line: str, number: int, count: Optional[int] = None) -> List[str]:
    parts = line.split()
    if count is not None and len(parts) < count:
        raise MeshParseError(f"expected at least {count} fields, found {len(parts)}", number)
    return parts


def read_mesh(path: Union[str, Path]) -> Mesh:
    """Read an ASCII mesh file (format described in the module docstring)"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise MeshError(f"cannot read mesh file {path}: {e}")

    node_index: Dict[int, int] = {}
    coords: List[List[float]] = []
    volume: List[Tuple[int, int, List[int], Optional[int]]] = []  # (file id, type, nodes, tag)
    lower: List[Tuple[int, List[int]]] = []
    raw_sets: List[Tuple[str, str, List[int], int]] = []

    def block_header(i: int) -> int:
        if i >= len(lines):
            raise MeshParseError("unexpected end of file", i)
        try:
            return int(lines[i].split()[0])
        except (ValueError, IndexError):
            raise MeshParseError(f"expected an entry count, found '{lines[i].strip()}'", i + 1)

    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if line == "$MeshFormat":
            version = lines[i + 1].split()[0] if i + 1 < len(lines) else ""
            if not version.startswith("2"):
                raise MeshParseError(f"unsupported format version '{version}'", i + 2)
            i += 3
        elif line == "$Nodes":
            n = block_header(i + 1)
            for k in range(n):
                number = i + 3 + k
                parts = _tokens(lines[number - 1], number, 4)
                try:
                    node_id = int(parts[0])
                    xyz = [float(v) for v in parts[1:4]]
                except ValueError:
                    raise MeshParseError("malformed node record", number)
                if node_id in node_index:
                    raise MeshParseError(f"duplicate node id {node_id}", number)
                node_index[node_id] = len(coords)
                coords.append(xyz)
            i += n + 2
            if i >= len(lines) or lines[i].strip() != "$EndNodes":
                raise MeshParseError("missing $EndNodes", i + 1)
            i += 1
        elif line == "$Elements":
            n = block_header(i + 1)
            for k in range(n):
                number = i + 3 + k
                parts = _tokens(lines[number - 1], number, 3)
                try:
                    values = [int(v) for v in parts]
                except ValueError:
                    raise MeshParseError("malformed element record", number)
                elem_id, elem_type, n_tags = values[0], values[1], values[2]
                tag = values[3] if n_tags >= 1 else None
                conn = values[3 + n_tags:]
                if elem_type in _GMSH_TYPES:
                    if len(conn) != _GMSH_TYPES[elem_type].n_nodes:
                        raise MeshParseError(
                            f"element {elem_id} has {len(conn)} nodes, "
                            f"{_GMSH_TYPES[elem_type].value} needs {_GMSH_TYPES[elem_type].n_nodes}",
                            number)
                    volume.append((elem_id, elem_type, conn, tag))
                elif elem_type in _GMSH_LOWER:
                    lower.append((elem_type, conn + [tag if tag is not None else 0]))
                else:
                    raise MeshParseError(f"unsupported element type {elem_type}", number)
            i += n + 2
            if i >= len(lines) or lines[i].strip() != "$EndElements":
                raise MeshParseError("missing $EndElements", i + 1)
            i += 1
        elif line == "$Sets":
            n = block_header(i + 1)
            for k in range(n):
                number = i + 3 + k
                parts = _tokens(lines[number - 1], number, 3)
                kind, name = parts[0], parts[1]
                if kind not in ("node", "element"):
                    raise MeshParseError(f"set kind must be node or element, got '{kind}'", number)
                try:
                    count = int(parts[2])
                    ids = [int(v) for v in parts[3:]]
                except ValueError:
                    raise MeshParseError("malformed set record", number)
                if len(ids) != count:
                    raise MeshParseError(f"set '{name}' declares {count} ids, lists {len(ids)}", number)
                raw_sets.append((kind, name, ids, number))
            i += n + 2
            if i >= len(lines) or lines[i].strip() != "$EndSets":
                raise MeshParseError("missing $EndSets", i + 1)
            i += 1
        elif line.startswith("$"):
            # skip unknown sections
            end = "$End" + line[1:]
            i += 1
            while i < len(lines) and lines[i].strip() != end:
                i += 1
            i += 1
        else:
            raise MeshParseError(f"unexpected content '{line[:40]}'", i + 1)

    if not coords:
        raise MeshParseError("no $Nodes block")
    if not volume:
        raise MeshParseError("no supported elements")

    dims = {_GMSH_TYPES[t].dim for _, t, _, _ in volume}
    top = max(dims)
    kinds = {_GMSH_TYPES[t] for _, t, _, _ in volume if _GMSH_TYPES[t].dim == top}
    if len(kinds) > 1:
        raise MeshParseError(f"mixed element kinds {sorted(k.value for k in kinds)}")
    kind = kinds.pop()

    element_index: Dict[int, int] = {}
    connectivity = []
    tags: Dict[str, List[int]] = {}
    lower_nodes: Dict[str, List[int]] = {}
    for elem_id, elem_type, conn, tag in volume:
        mapped = []
        for node in conn:
            if node not in node_index:
                raise DanglingNodeError(elem_id, node)
            mapped.append(node_index[node])
        if _GMSH_TYPES[elem_type].dim < top:
            lower_nodes.setdefault(f"physical_{tag or 0}", []).extend(mapped)
            continue
        element_index[elem_id] = len(connectivity)
        connectivity.append(mapped)
        if tag is not None:
            tags.setdefault(f"physical_{tag}", []).append(element_index[elem_id])
    for elem_type, conn in lower:
        tag, conn = conn[-1], conn[:-1]
        for node in conn:
            if node not in node_index:
                raise DanglingNodeError(-1, node)
        lower_nodes.setdefault(f"physical_{tag}", []).extend(node_index[n] for n in conn)

    coords = np.asarray(coords)[:, :kind.dim]
    node_sets = _boundary_sets(coords)
    node_sets.update({k: np.unique(v) for k, v in lower_nodes.items()})
    element_sets = {k: np.asarray(v, dtype=np.int64) for k, v in tags.items()}
    for set_kind, name, ids, number in raw_sets:
        index = node_index if set_kind == "node" else element_index
        missing = [v for v in ids if v not in index]
        if missing:
            raise MeshParseError(f"set '{name}' references unknown {set_kind} {missing[0]}", number)
        target = node_sets if set_kind == "node" else element_sets
        target[name] = np.unique([index[v] for v in ids]).astype(np.int64)

    mesh = Mesh(coords=coords, connectivity=np.asarray(connectivity), kind=kind,
                node_sets=node_sets, element_sets=element_sets)
    element_geometry(mesh)
    logger.info("read %r from %s", mesh, path)
    return mesh


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> None:
    """Write a mesh in the format read by read_mesh (ids are 1-based)"""
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.n_nodes)]
    coords = np.zeros((mesh.n_nodes, 3))
    coords[:, :mesh.dim] = mesh.coords
    out += [f"{i + 1} {x:.17g} {y:.17g} {z:.17g}" for i, (x, y, z) in enumerate(coords)]
    out += ["$EndNodes", "$Elements", str(mesh.n_elements)]
    out += [f"{e + 1} {mesh.kind.gmsh_type} 0 " + " ".join(str(n + 1) for n in conn)
            for e, conn in enumerate(mesh.connectivity)]
    out += ["$EndElements"]
    sets = [("node", k, v) for k, v in sorted(mesh.node_sets.items())]
    sets += [("element", k, v) for k, v in sorted(mesh.element_sets.items())]
    if sets:
        out += ["$Sets", str(len(sets))]
        out += [f"{kind} {name} {len(ids)} " + " ".join(str(int(i) + 1) for i in ids)
                for kind, name, ids in sets]
        out += ["$EndSets"]
    Path(path).write_text("\n".join(out) + "\n")
