using UnityEngine;

[CreateAssetMenu(fileName = "Weapon", menuName = "Game/Weapon Data")]
public class WeaponData : ScriptableObject
{
    public string displayName = "Sword";
    public int damage = 10;
    public float cooldown = 0.4f;
    public AudioClip swingSound;

    public float DamagePerSecond => cooldown > 0f ? damage / cooldown : damage;
}
