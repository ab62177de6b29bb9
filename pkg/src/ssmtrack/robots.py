"""Serial-arm kinematics and the sphere hulls used for clearance checks.

The robot body is approximated by spheres attached along each link;
minimum human-robot distance then reduces to point-sphere arithmetic
that is cheap enough to evaluate for every stage of the path in one
vectorized pass.
"""

from dataclasses import dataclass, field

import numpy as np


def _rot(axis, angle):
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"unknown rotation axis {axis!r}")


@dataclass
class SerialArm:
    """Revolute chain; link l extends along local +x after joint l's rotation."""

    link_lengths: np.ndarray
    axes: str
    spheres_per_link: int = 3
    sphere_radius: float = 0.06
    base: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.link_lengths = np.asarray(self.link_lengths, dtype=float)
        self.base = np.asarray(self.base, dtype=float)
        if len(self.axes) != len(self.link_lengths):
            raise ValueError("need one rotation axis per link")
        if self.spheres_per_link < 1:
            raise ValueError("spheres_per_link must be >= 1")

    @property
    def dof(self):
        return len(self.link_lengths)

    @property
    def n_spheres(self):
        return self.dof * self.spheres_per_link

    @property
    def sphere_radii(self):
        return np.full(self.n_spheres, self.sphere_radius)

    def joint_points(self, q):
        """Base and joint/tip positions, shape (dof+1, 3)."""
        q = np.asarray(q, dtype=float)
        pts = np.empty((self.dof + 1, 3))
        pts[0] = self.base
        R = np.eye(3)
        for l in range(self.dof):
            R = R @ _rot(self.axes[l], q[l])
            pts[l + 1] = pts[l] + R @ np.array([self.link_lengths[l], 0.0, 0.0])
        return pts

    def sphere_centers(self, q):
        """Sphere centers along each link, shape (n_spheres, 3).

        Per link the centers sit at fractions (i+1)/ns of its length,
        so the distal end of every link (elbow, tip) is always covered.
        """
        pts = self.joint_points(q)
        ns = self.spheres_per_link
        fracs = (np.arange(ns) + 1.0) / ns
        seg = pts[1:] - pts[:-1]
        return (pts[:-1, None, :] + fracs[None, :, None] * seg[:, None, :]).reshape(-1, 3)


def planar_arm(dof=3, reach=1.2, spheres_per_link=3, sphere_radius=0.06):
    """All-z-axis arm moving in the z=0 plane."""
    return SerialArm(link_lengths=np.full(dof, reach / dof), axes="z" * dof,
                     spheres_per_link=spheres_per_link, sphere_radius=sphere_radius)


def spatial_arm(reach=1.5, spheres_per_link=2, sphere_radius=0.07):
    """Six-joint chain with an anthropomorphic z-y-y-x-y-x axis pattern."""
    lengths = np.array([0.2, 0.35, 0.35, 0.25, 0.2, 0.15]) * (reach / 1.5)
    return SerialArm(link_lengths=lengths, axes="zyyxyx",
                     spheres_per_link=spheres_per_link, sphere_radius=sphere_radius)


@dataclass
class PointBody:
    """Single-sphere body whose one coordinate is position along the x axis.

    Lets 1-D vehicles reuse the arm tooling: q = [s] maps to the
    sphere center (s, 0, 0).
    """

    radius: float = 0.0

    dof = 1
    n_spheres = 1

    @property
    def sphere_radii(self):
        return np.array([self.radius])

    def sphere_centers(self, q):
        return np.array([[float(q[0]), 0.0, 0.0]])


def centers_over_grid(arm, grid):
    """Sphere centers at every stage, shape (N+1, n_spheres, 3)."""
    out = np.empty((grid.n_segments + 1, arm.n_spheres, 3))
    for i in range(grid.n_segments + 1):
        out[i] = arm.sphere_centers(grid.q[i])
    return out


def min_distances(centers, radii, obs_pos, obs_radius):
    """Per-stage clearance to one obstacle sphere, shape (N+1,).

    centers: (N+1, S, 3).  Clamped at 0: overlap reads as contact, not
    as a negative depth.
    """
    diff = centers - np.asarray(obs_pos, dtype=float)
    d = np.sqrt(np.einsum("isk,isk->is", diff, diff))
    return np.clip(np.min(d - radii, axis=1) - obs_radius, 0.0, None)
