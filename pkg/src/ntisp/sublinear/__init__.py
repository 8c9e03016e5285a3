"""Planar separators, separating trees and the streaming solvers built on
them, plus digit-streaming Partition/Knapsack and slice-streaming tiling."""
