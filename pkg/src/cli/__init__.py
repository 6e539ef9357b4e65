# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
命令行接口模块：generate / sweep / compare / workspace-demo / config
"""

from .main import app, main

__all__ = ["app", "main"]
