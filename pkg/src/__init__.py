# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
HoloVote Package

委托式（全息）集体决策的仿真引擎：构建代表性社会网络，把不参与者的投票权力传播给参与者，
计算集体决策及其相对完全参与的误差，并提供问题求解工作区的状态机。
"""

__version__ = "1.0.0"
__author__ = "Williams.Wang"
