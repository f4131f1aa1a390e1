"""
CLI 退出碼對照

每個模組提供 EXIT_CODE_MAPPINGS：DomainError 子類別 → 退出碼。
啟動時自動探索並驗證所有具體的 DomainError 都有對照。
"""
